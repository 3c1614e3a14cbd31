#include "enclosure/source.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace enclosure {
namespace {

constexpr const char* kModule = "source";
using boost::math::quadrature::gauss;

// int_a^b g(t) dt by 20-point Gauss panels, panel width chosen so that tau * width <= 1.
template <typename G>
double panel_integral(G&& g, double a, double b, double tau) {
  if (b <= a) return 0;
  const int n = std::clamp(static_cast<int>(std::ceil(std::max(tau, 1.0) * (b - a))), 4, 1 << 14);
  const double w = (b - a) / n;
  double s = 0;
  for (int k = 0; k < n; ++k) s += gauss<double, 20>::integrate(g, a + k * w, a + (k + 1) * w);
  return s;
}

// int_0^c t sin(wt) e^{-tau t} dt = Im[(1 - e^{-zc}(1 + zc)) / z^2], z = tau - i w.
double ramp_laplace(double omega, double tau, double c) {
  const std::complex<double> z(tau, -omega);
  std::complex<double> tail = 0;
  if (std::isfinite(c)) tail = std::exp(-z * c) * (1.0 + z * c);
  if (std::abs(z * c) < 1e-3 && std::isfinite(c)) {
    // Series of int_0^c t e^{-zt} dt for tiny |zc| avoids cancellation.
    std::complex<double> term = c * c / 2.0, sum = 0;
    for (int k = 0; k < 12; ++k) {
      sum += term;
      term *= -z * c * double(k + 2) / double((k + 1) * (k + 3));
    }
    return sum.imag();
  }
  return ((1.0 - tail) / (z * z)).imag();
}

double taper(double t, double cut, double off) {
  const double u = (t - cut) / (off - cut);
  const double c = std::cos(0.5 * std::numbers::pi * u);
  return c * c;
}

double bump(double t, double cut, double off) {
  const double s = std::sin(std::numbers::pi * (t - cut) / (off - cut));
  return s * s;
}

}  // namespace

Pulse::Pulse(Kind k, double amplitude) : kind_(std::move(k)), amplitude_(amplitude) {
  if (auto* rs = std::get_if<RampedSine>(&kind_)) {
    if (!(rs->omega >= 0) || !(rs->cut > 0))
      throw Error(ErrorCode::InvalidArgument, kModule, "ramped sine needs omega >= 0 and cut > 0");
    if (rs->zero_net_charge && rs->off > rs->cut) {
      const double w = rs->omega, c = rs->cut;
      double head = w == 0 ? 0 : (std::sin(w * c) - w * c * std::cos(w * c)) / (w * w);
      head += taper_integral();
      beta_ = head / (0.5 * (rs->off - rs->cut));
    }
  } else if (auto* pr = std::get_if<PolynomialRamp>(&kind_)) {
    if (pr->degree < 1 || !(pr->off > 0))
      throw Error(ErrorCode::InvalidArgument, kModule, "polynomial ramp needs degree >= 1 and off > 0");
  } else {
    const auto& tab = std::get<Tabulated>(kind_);
    if (tab.t.size() < 2 || tab.t.size() != tab.v.size())
      throw Error(ErrorCode::InvalidArgument, kModule, "tabulated pulse needs matching t/v columns");
    if (tab.t.front() != 0.0 || tab.v.front() != 0.0)
      throw Error(ErrorCode::InvalidArgument, kModule, "tabulated pulse must start at (0, 0)");
    double h1 = 0;
    for (size_t i = 1; i < tab.t.size(); ++i) {
      const double dt = tab.t[i] - tab.t[i - 1];
      if (!(dt > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "tabulated times must increase");
      h1 += (tab.v[i] - tab.v[i - 1]) * (tab.v[i] - tab.v[i - 1]) / dt;
    }
    if (!std::isfinite(h1)) throw Error(ErrorCode::InvalidArgument, kModule, "tabulated pulse is not H1");
  }
}

double Pulse::taper_integral() const {
  const auto& rs = std::get<RampedSine>(kind_);
  auto g = [&](double t) { return t * std::sin(rs.omega * t) * taper(t, rs.cut, rs.off); };
  return panel_integral(g, rs.cut, rs.off, 1.0);
}

Pulse Pulse::ramped_sine(RampedSine params, double amplitude) { return Pulse(params, amplitude); }
Pulse Pulse::polynomial_ramp(PolynomialRamp params, double amplitude) { return Pulse(params, amplitude); }
Pulse Pulse::tabulated(Tabulated table, double amplitude) { return Pulse(std::move(table), amplitude); }
Pulse Pulse::zero() { return Pulse(RampedSine{}, 0.0); }

Pulse Pulse::scaled(double factor) const {
  Pulse out = *this;
  out.amplitude_ *= factor;
  return out;
}

double Pulse::operator()(double t) const {
  if (t <= 0 || amplitude_ == 0) return 0;
  return amplitude_ * std::visit(
                          [&](const auto& k) -> double {
                            using T = std::decay_t<decltype(k)>;
                            if constexpr (std::is_same_v<T, RampedSine>) {
                              if (t <= k.cut) return t * std::sin(k.omega * t);
                              if (t >= k.off) return 0;
                              return t * std::sin(k.omega * t) * taper(t, k.cut, k.off) -
                                     beta_ * bump(t, k.cut, k.off);
                            } else if constexpr (std::is_same_v<T, PolynomialRamp>) {
                              if (t >= k.off) return 0;
                              const double u = t / k.off;
                              return std::pow(u * (1 - u), k.degree) * (1 - 2 * u);
                            } else {
                              if (t >= k.t.back()) return 0;
                              const auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
                              const size_t i = static_cast<size_t>(it - k.t.begin()) - 1;
                              const double u = (t - k.t[i]) / (k.t[i + 1] - k.t[i]);
                              return k.v[i] + u * (k.v[i + 1] - k.v[i]);
                            }
                          },
                          kind_);
}

double Pulse::support_end() const {
  return std::visit(
      [](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, RampedSine>) return std::max(k.cut, k.off);
        else if constexpr (std::is_same_v<T, PolynomialRamp>) return k.off;
        else return k.t.back();
      },
      kind_);
}

double Pulse::nominal_gamma() const {
  return std::visit(
      [](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, RampedSine>) return k.omega != 0 ? 3.0 : 0.0;
        else if constexpr (std::is_same_v<T, PolynomialRamp>) return k.degree + 1.0;
        else {
          // f ~ c t^m near 0 gives gamma = m + 1; estimate m from the first two nonzero samples.
          size_t i = 1;
          while (i < k.v.size() && k.v[i] == 0) ++i;
          if (i + 1 >= k.v.size() || k.v[i + 1] == 0 || (k.v[i] > 0) != (k.v[i + 1] > 0)) return 2.0;
          const double m = std::log(k.v[i + 1] / k.v[i]) / std::log(k.t[i + 1] / k.t[i]);
          return std::max(1.0, m) + 1.0;
        }
      },
      kind_);
}

std::string Pulse::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, RampedSine>)
          os << "ramped_sine omega=" << k.omega << " cut=" << k.cut << " off=" << k.off
             << " zero_net_charge=" << k.zero_net_charge;
        else if constexpr (std::is_same_v<T, PolynomialRamp>)
          os << "polynomial_ramp degree=" << k.degree << " off=" << k.off;
        else
          os << "tabulated samples=" << k.t.size();
      },
      kind_);
  os << " amplitude=" << amplitude_;
  return os.str();
}

double SourceSpec::slowness() const { return std::sqrt(eps * mu); }
double SourceSpec::speed() const { return 1.0 / std::sqrt(eps * mu); }

void SourceSpec::check() const {
  if (!(eta > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "eta must be positive");
  if (!(T > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "T must be positive");
  if (!(eps > 0) || !(mu > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "eps and mu must be positive");
  if (std::abs(a.norm() - 1) > 1e-12) throw Error(ErrorCode::InvalidArgument, kModule, "a must be a unit vector");
}

double pulse_value(const Pulse& pulse, double t, double T) {
  if (!(t >= 0) || t > T) throw Error(ErrorCode::OutOfWindow, kModule, "time outside [0, T]");
  return pulse(t);
}

double laplace_pulse(const Pulse& pulse, double tau, double T) {
  if (!(tau > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "tau must be positive");
  if (pulse.amplitude() == 0) return 0;
  const double upper = std::min(T, pulse.support_end());
  const double value = std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, RampedSine>) {
          double s = ramp_laplace(k.omega, tau, std::min(k.cut, upper));
          if (upper > k.cut) {
            auto g = [&](double t) { return pulse(t) / pulse.amplitude() * std::exp(-tau * t); };
            s += panel_integral(g, k.cut, upper, tau);
          }
          return s;
        } else if constexpr (std::is_same_v<K, PolynomialRamp>) {
          auto g = [&](double t) { return pulse(t) / pulse.amplitude() * std::exp(-tau * t); };
          return panel_integral(g, 0.0, upper, tau);
        } else {
          // Exact integral of the piecewise-linear interpolant against e^{-tau t}.
          double s = 0;
          for (size_t i = 0; i + 1 < k.t.size() && k.t[i] < upper; ++i) {
            const double t0 = k.t[i], t1 = std::min(k.t[i + 1], upper);
            const double full = k.t[i + 1] - k.t[i];
            const double f0 = k.v[i], f1 = k.v[i] + (k.v[i + 1] - k.v[i]) * (t1 - t0) / full;
            const double h = t1 - t0, u = tau * h;
            double e1, e2;
            if (u < 1e-4) {
              e1 = 1 - u / 2 + u * u / 6;
              e2 = 0.5 - u / 3 + u * u / 8;
            } else {
              const double em = std::exp(-u);
              e1 = -std::expm1(-u) / u;
              e2 = (1 - (1 + u) * em) / (u * u);
            }
            s += std::exp(-tau * t0) * h * (f0 * e1 + (f1 - f0) * e2);
          }
          return s;
        }
      },
      pulse.kind());
  return pulse.amplitude() * value;
}

SourceDiagnostics validate_source(const SourceSpec& spec, const Obstacle& obstacle) {
  spec.check();
  SourceDiagnostics dg;
  const double sd = signed_distance(obstacle, spec.p);
  if (sd <= spec.eta)
    throw Error(ErrorCode::Overlap, kModule, "probe ball closure meets the obstacle closure");
  dg.d_boundary = sd;
  dg.dist = sd - spec.eta;
  dg.T_required = 2 * spec.slowness() * dg.dist;
  dg.window_ok = spec.T > dg.T_required;
  if (!dg.window_ok) dg.warnings.push_back("T does not exceed 2 sqrt(eps mu) dist(D, B)");
  try {
    for (const auto& sp : first_reflector(obstacle, spec.p)) {
      ReflectorCheck rc{sp.q, sp.nu, spec.a.dot(sp.nu), true};
      rc.nondegenerate = std::abs(std::abs(rc.a_dot_nu) - 1) > 1e-12;
      if (!rc.nondegenerate) dg.warnings.push_back("a is parallel to the reflector normal");
      dg.reflectors.push_back(rc);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ContinuumReflector) throw;
    dg.continuum_reflector = true;
    dg.warnings.push_back("first reflector is not a finite set");
  }
  dg.pulse_gamma = spec.pulse.nominal_gamma();
  dg.gamma_ok = spec.gamma >= 1.5 && (spec.pulse.amplitude() == 0 || std::abs(dg.pulse_gamma - spec.gamma) < 1e-9);
  if (!dg.gamma_ok) dg.warnings.push_back("declared gamma is inconsistent with the pulse");
  return dg;
}

}  // namespace enclosure
