#pragma once

#include "enclosure/fdtd.hpp"
#include "enclosure/logdomain.hpp"
#include "enclosure/source.hpp"

#include <string>
#include <utility>
#include <vector>

namespace enclosure {

using RecordMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Trapezoid transform of every column: sum_n w_n e^{-tau (t_n - shift)} rows(n, :).
Eigen::VectorXd laplace_columns(const RecordMatrix& rows, double dt, double tau, double shift = 0.0);

// a.W_e at each record node.
Eigen::VectorXd laplace_field(const FieldRecord& record, double tau);

struct IndicatorOptions {
  // Subtract the obstacle-free record of the same grid instead of the closed-form V.
  bool use_reference = true;
  // Evaluate the record transform at the Laplace parameter whose discrete decay rate along the
  // grid axes equals the continuum rate tau sqrt(eps mu), and rescale by f~(tau) / f^(s).
  bool dispersion_matched = false;
};

struct IndicatorPoint {
  double tau = 0;
  SignedLog<> I;
  double aWe_norm = 0;  // weighted L2 norm of a.W_e over the nodes
  double aV_norm = 0;   // same for the subtracted probe field
};

struct IndicatorSeries {
  std::vector<IndicatorPoint> points;
  std::string origin;  // "fdtd" or "semianalytic"

  std::vector<double> taus() const;
  void check() const;  // strictly increasing tau, finite values
};

IndicatorPoint indicator_point(const FieldRecord& record, const SourceSpec& spec, double tau,
                               const IndicatorOptions& options = {});

inline SignedLog<> indicator_value(const FieldRecord& record, const SourceSpec& spec, double tau,
                                   const IndicatorOptions& options = {}) {
  return indicator_point(record, spec, tau, options).I;
}

IndicatorSeries indicator_series(const FieldRecord& record, const SourceSpec& spec, const std::vector<double>& taus,
                                 const IndicatorOptions& options = {});

enum class TauSpacing { Log, Linear };
std::vector<double> tau_grid(double tau_min, double tau_max, int count, TauSpacing spacing = TauSpacing::Log);

void write_indicator_csv(const std::string& path, const IndicatorSeries& series);
IndicatorSeries read_indicator_csv(const std::string& path);

// What is divided out of log|I| before the slope fit.
enum class Normalization {
  None,    // log|I|: slope -> -2 sqrt(eps mu) dist
  Pulse,   // log|tau^2 I / f~^2|: slope -> -2 sqrt(eps mu) dist
  Kernel,  // log|I / (K f~)^2|: slope -> -2 sqrt(eps mu) (dist + eta)
};

const char* to_string(Normalization n);

struct DistanceOptions {
  Normalization normalization = Normalization::Kernel;
  int min_points = 8;
  double trim_factor = 3.0;
};

struct DistanceEstimate {
  double dist = 0;
  double slope = 0;
  double slope_stderr = 0;
  std::pair<double, double> slope_ci;
  std::pair<double, double> dist_ci;
  std::pair<double, double> tau_window;
  double positivity_onset = 0;
  int points_used = 0;
  double naive = 0;           // (1/tau_max) log|I(tau_max)| / (-2 sqrt(eps mu))
  double raw_regression = 0;  // slope fit of the unnormalized log|I|
  Normalization normalization = Normalization::Kernel;
};

DistanceEstimate extract_distance(const IndicatorSeries& series, const SourceSpec& spec,
                                  const DistanceOptions& options = {});

// Where the record can be trusted. The upper edge keeps the probe decay resolved on the grid
// (tau~ h <= resolution); the lower edge keeps the part of the echo cut off at T small
// (tau (T - 2 sqrt(eps mu) dist) >= truncation), with dist a pilot estimate.
struct WindowPolicy {
  double resolution = 1.0;
  double truncation = 4.0;
};

struct TauWindow {
  double lo = 0, hi = 0;
  bool truncation_limited = false;  // the lower edge came from the truncation rule
  bool empty() const { return !(hi > lo); }
};

TauWindow stable_tau_window(const SourceSpec& spec, double h, double pilot_dist, const WindowPolicy& policy = {});

enum class LimitSequence {
  Raw,     // tau^2 e^{2 tau~ dist} I / f~^2
  Kernel,  // (eta^2 / 4 eps^2) e^{2 tau~ (dist + eta)} I / (K f~)^2
};

struct LimitOptions {
  LimitSequence sequence = LimitSequence::Raw;
  int order = 2;  // polynomial degree in 1/tau
  double cauchy_tol = 0.25;
  double tau_min = 0;  // only points with tau >= tau_min enter
};

struct SecondOrderLimit {
  double value = 0;
  double raw_value = 0;
  double kernel_value = 0;
  std::vector<double> tau;
  std::vector<double> sequence;  // the normalized sequence actually extrapolated
  std::pair<double, double> window;
  double spread = 0;  // stability of the extrapolation, relative to the sequence scale
  int order = 0;
};

SecondOrderLimit second_order_limit(const IndicatorSeries& series, const SourceSpec& spec, double dist,
                                    const LimitOptions& options = {});

// Least-squares L for s(tau) = L + c_1 / tau + ... + c_order / tau^order.
double richardson_limit(const std::vector<double>& tau, const std::vector<double>& s, int order);

}  // namespace enclosure
