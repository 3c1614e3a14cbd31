#pragma once

#include "enclosure/geometry.hpp"
#include "enclosure/indicator.hpp"
#include "enclosure/logdomain.hpp"
#include "enclosure/source.hpp"

#include <functional>
#include <string>
#include <vector>

namespace enclosure {

struct ReflectorSummary {
  Vec3 q;
  Vec3 nu;
  Mat2 shape;          // S_q of the obstacle (pinned convention S = -d nu)
  double det = 0;      // det(S_q(observation sphere) - S_q(obstacle))
  double directional = 0;  // 1 - (a . nu_q)^2
};

struct OracleResult {
  double value = 0;       // limit of tau^2 e^{2 tau~ dist} I / f~^2
  double d_boundary = 0;  // d(p, boundary of D)
  double prefactor = 0;   // (pi / 2 eps^2) (eta / d)^2 / (eps mu)
  std::vector<ReflectorSummary> reflectors;
  // Limit of tau^2 e^{2 tau~ dist} J / f~^2: exactly half of value.
  double energy_value() const { return 0.5 * value; }
};

// (pi / 2 eps^2) (eta / d)^2 / (eps mu).
double limit_prefactor(double eta, double d, double eps, double mu = 1.0);

OracleResult laplace_oracle(const Obstacle& obstacle, const SourceSpec& spec, double det_tol = 1e-12);

// Integrates g(x, nu) dS over the boundary with polar patches centered at the point of each
// component nearest to p; the angular breakpoints are scaled to the peak width 1/sqrt(kappa).
double peaked_surface_integral(const Obstacle& obstacle, const Vec3& p, double kappa,
                               const std::function<double(const Vec3&, const Vec3&)>& g, double rel_tol = 1e-9);

enum class SurfaceWeight { Unit, MForm };

struct SurfaceIntegral {
  double scaled = 0;  // e^{2 tau~ d} * integral
  double d = 0;       // d(p, boundary of D)
};

// int e^{-2 tau~ |x-p|} / |x-p|^2 w(x) dS with w = 1 or w = (omega . nu)((omega . a)^2 - 1).
SurfaceIntegral surface_laplace_integral(const Obstacle& obstacle, const Vec3& p, double tau_tilde,
                                         SurfaceWeight weight, const Vec3& a = Vec3::UnitZ(), double rel_tol = 1e-9);

enum class EnergyForm {
  Poynting,   // -(1/(mu eps)) int nu . (curl V x V) dS
  CrossCurl,  // (1/(mu eps)) int (nu x V) . curl V dS
};

SignedLog<> J_energy(const Obstacle& obstacle, const SourceSpec& spec, double tau,
                     EnergyForm form = EnergyForm::Poynting, double rel_tol = 1e-9);

// 2 J(tau), after checking non-degeneracy, directivity and the time window.
SignedLog<> normalized_indicator_prediction(const Obstacle& obstacle, const SourceSpec& spec, double tau);

// Indicator series with I replaced by 2 J.
IndicatorSeries semianalytic_series(const Obstacle& obstacle, const SourceSpec& spec, const std::vector<double>& taus);

struct RecoveryResult {
  double R[2] = {0, 0};
  double X[2] = {0, 0};
  double lambda[2] = {0, 0};
  double Y1 = 0, Y2 = 0;  // H and K
  double K = 0, H = 0;
  double residual = 0;  // max |X_j - det(lambda_j I - S)| reconstructed from (K, H)
  bool negative_discriminant = false;  // H^2 < K beyond relative 1e-3 (no real principal curvatures)
};

RecoveryResult recover_curvatures(const double R[2], const double s[2], double d_p, const double eta[2],
                                  double a_dot_nu, double eps, double mu = 1.0);

using DistanceProbe = std::function<double(const Vec3&)>;

bool probe_direction(const DistanceProbe& dist_at, const Vec3& p, const Vec3& omega, double s, double tol = 1e-9);

struct ProbeOutcome {
  Vec3 omega;
  double deviation = 0;  // (dist_at(p + s d omega) - (1 - s) d) / d
  bool on_reflector = false;
};

std::vector<ProbeOutcome> probe_sweep(const DistanceProbe& dist_at, const Vec3& p, const std::vector<Vec3>& directions,
                                      double s, double tol = 1e-9);

// Geodesic icosahedral directions (10 * 4^level + 2 of them), rotated so one vertex is `align`.
std::vector<Vec3> icosahedral_directions(int level, const Vec3& align = Vec3::UnitX());

}  // namespace enclosure
