#pragma once

#include "enclosure/geometry.hpp"
#include "enclosure/types.hpp"

#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace enclosure {

// t sin(wt) on [0, cut]; on [cut, off] the sine is tapered to zero with a C1 cos^2 window and,
// when zero_net_charge is set, a sin^2 bump is subtracted so the pulse integrates to zero.
// off <= cut means no continuation: the pulse stops at cut.
struct RampedSine {
  double omega = 1.0;
  double cut = 1.0;
  double off = 2.0;
  bool zero_net_charge = true;
};

// (t/off)^k (1 - t/off)^k (1 - 2t/off) on [0, off]: smooth, f(0) = 0, zero net charge.
struct PolynomialRamp {
  int degree = 2;
  double off = 2.0;
};

// Piecewise-linear through (t_i, v_i); zero after the last sample.
struct Tabulated {
  std::vector<double> t;
  std::vector<double> v;
};

class Pulse {
 public:
  using Kind = std::variant<RampedSine, PolynomialRamp, Tabulated>;

  static Pulse ramped_sine(RampedSine params, double amplitude = 1.0);
  static Pulse polynomial_ramp(PolynomialRamp params, double amplitude = 1.0);
  static Pulse tabulated(Tabulated table, double amplitude = 1.0);
  static Pulse zero();

  const Kind& kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  Pulse scaled(double factor) const;

  // Unchecked evaluation; zero outside the support.
  double operator()(double t) const;
  // End of the support (time after which f vanishes identically).
  double support_end() const;
  // Exponent with |f~(tau)| ~ tau^-gamma for large tau.
  double nominal_gamma() const;
  std::string describe() const;

 private:
  Pulse(Kind k, double amplitude);
  double taper_integral() const;

  Kind kind_;
  double amplitude_ = 1.0;
  double beta_ = 0.0;  // bump coefficient enforcing zero net charge
};

struct SourceSpec {
  Vec3 p = Vec3::Zero();
  double eta = 0.25;
  Vec3 a = Vec3::UnitZ();
  Pulse pulse = Pulse::ramped_sine({});
  double T = 4.0;
  double gamma = 3.0;
  double eps = 1.0;
  double mu = 1.0;

  double slowness() const;  // sqrt(eps mu)
  double speed() const;     // 1 / sqrt(eps mu)
  void check() const;       // throws InvalidArgument on violated invariants
};

// Pointwise value on the observation window [0, T].
double pulse_value(const Pulse& pulse, double t, double T = std::numeric_limits<double>::infinity());

// f~(tau) = int_0^T e^{-tau t} f(t) dt.
double laplace_pulse(const Pulse& pulse, double tau, double T = std::numeric_limits<double>::infinity());

struct ReflectorCheck {
  Vec3 q;
  Vec3 nu;
  double a_dot_nu = 0;
  bool nondegenerate = true;  // |a . nu| != 1
};

struct SourceDiagnostics {
  double d_boundary = 0;  // d(p, boundary of D)
  double dist = 0;        // dist(D, B) = d_boundary - eta
  double T_required = 0;  // 2 sqrt(eps mu) dist
  bool window_ok = false;
  std::vector<ReflectorCheck> reflectors;
  bool continuum_reflector = false;
  double pulse_gamma = 0;
  bool gamma_ok = false;
  std::vector<std::string> warnings;
};

SourceDiagnostics validate_source(const SourceSpec& spec, const Obstacle& obstacle);

}  // namespace enclosure
