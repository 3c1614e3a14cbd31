#pragma once

#include "enclosure/geometry.hpp"
#include "enclosure/source.hpp"

#include <functional>
#include <string>
#include <vector>

namespace enclosure {

// A field on D with its Jacobian J_ij = dV_i/dx_j, both in units of exp(log_scale).
struct BaseField {
  std::function<Vec3(const Vec3&)> value;
  std::function<Mat3(const Vec3&)> jacobian;
  double log_scale = 0;
  double tau = 1, eps = 1, mu = 1;
};

// The probe field V at slowness tau, scaled by its magnitude at the obstacle's nearest point.
BaseField probe_base_field(const Obstacle& obstacle, const SourceSpec& spec, double tau);

struct ReflectedField {
  BaseField base;
  Obstacle obstacle = Obstacle::none();
  TubularParams collar;
};

ReflectedField make_reflected_field(const Obstacle& obstacle, BaseField base);
ReflectedField make_reflected_field(const Obstacle& obstacle, const SourceSpec& spec, double tau);

// V*(x) = -A(x^r) + B(x^r) + 2 d(x) n'(x) A(x^r), A = (I - nu nu) V, B = nu nu V.
Vec3 reflect(const ReflectedField& field, const Vec3& x);
// Same with a caller-supplied reflection map (used to perturb the map).
Vec3 reflect(const ReflectedField& field, const ReflectionMap& map);

struct TraceReport {
  std::vector<Vec3> points;
  std::vector<double> deviation;  // per sample, same units as scale
  double max_deviation = 0;
  double scale = 0;  // max |V| over the samples
  double relative() const { return scale > 0 ? max_deviation / scale : max_deviation; }
};

// max |V* x nu + V x nu| over boundary samples. A nonzero q_offset moves the reflected
// point along the tangent by that distance, which breaks the identity at first order.
TraceReport check_tangential_trace(const ReflectedField& field, const std::vector<Vec3>& samples,
                                   double q_offset = 0);

struct CurlTraceReport {
  std::vector<Vec3> points;
  std::vector<double> deviation;       // |nu x (curl V* - curl V)| at h_fd
  std::vector<double> deviation_half;  // same at h_fd / 2
  double scale = 0;                    // max |nu x curl V| over the samples
  double relative = 0;                 // max deviation / scale at h_fd
  double relative_half = 0;
  double order = 0;  // log2(relative / relative_half)
  double h_fd = 0;
};

// One-sided second-order difference curls of V* (from outside) and V (from inside).
CurlTraceReport check_curl_trace(const ReflectedField& field, const std::vector<Vec3>& samples, double h_fd);

// min(delta0 / 8, 1e-3 * diameter).
double default_fd_step(const Obstacle& obstacle);

struct ResidualReport {
  Vec3 x;
  double d = 0;
  double residual = 0;      // |(1/(mu eps)) curl curl V* + tau^2 V*|
  double first_order = 0;   // |V(x^r)| + |V'(x^r)|
  double second_order = 0;  // d |grad^2 V(x^r)|
  double h_fd = 0;
};

ResidualReport residual_structure(const ReflectedField& field, const Vec3& x, double h_fd);

// Envelope constants with residual <= C1 first_order + C2 second_order: C1 from points with
// d = 0, then C2 from the rest.
struct ResidualFit {
  double C1 = 0;
  double C2 = 0;
  int boundary_points = 0;
  int interior_points = 0;
};

ResidualFit fit_residual_bound(const std::vector<ResidualReport>& reports);

struct ReflectionRow {
  Vec3 point;
  std::string identity;
  double deviation = 0;
  double order = 0;
};

void write_reflection_csv(const std::string& path, const std::vector<ReflectionRow>& rows);

}  // namespace enclosure
