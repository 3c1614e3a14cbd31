#pragma once

#include "enclosure/logdomain.hpp"
#include "enclosure/source.hpp"
#include "enclosure/types.hpp"

#include <cmath>
#include <numbers>

namespace enclosure {

// phi(xi) = xi cosh xi - sinh xi.
template <typename Scalar>
Scalar phi(Scalar xi) {
  using std::abs, std::exp;
  const Scalar a = abs(xi);
  Scalar out;
  if (a < Scalar(0.5)) {
    // sum_k 2k xi^(2k+1) / (2k+1)!
    const Scalar x2 = a * a;
    Scalar term = a * x2 / Scalar(6), sum = 0;
    for (int k = 1; k < 14; ++k) {
      sum += Scalar(2 * k) * term;
      term *= x2 / Scalar((2 * k + 2) * (2 * k + 3));
    }
    out = sum;
  } else {
    out = (a - 1) * exp(a) / 2 + (a + 1) * exp(-a) / 2;
  }
  return xi < 0 ? -out : out;
}

// log phi(xi) for xi > 0, finite for arguments where phi itself overflows.
template <typename Scalar>
Scalar log_phi(Scalar xi) {
  using std::exp, std::log;
  if (xi < Scalar(0.5)) return log(phi(xi));
  return xi + log((xi - 1) / 2 + (xi + 1) * exp(-2 * xi) / 2);
}

// (1/4pi) int_B e^{-k|x-y|}/|x-y| dy for |x - p| > eta, k = tau_tilde.
template <typename Scalar>
Scalar mean_value_kernel(const Vector3<Scalar>& x, const Vector3<Scalar>& p, Scalar eta, Scalar tau_tilde) {
  using std::exp, std::log;
  const Scalar r = (x - p).norm();
  if (!(r > eta)) throw Error(ErrorCode::InsideBall, "freefield", "point inside the probe ball");
  return exp(log_phi(tau_tilde * eta) - 3 * log(tau_tilde) - tau_tilde * r) / r;
}

inline double mean_value_kernel(const Vec3& x, const SourceSpec& spec, double tau) {
  return mean_value_kernel<double>(x, spec.p, spec.eta, tau * spec.slowness());
}

// Free field V of the probe problem at a fixed tau; all values are returned as
// mantissa * exp(log_scale) with log_scale = log|K f~| - tau_tilde |x - p|.
template <typename Scalar = double>
struct ProbeField {
  Vector3<Scalar> p;
  Vector3<Scalar> a;
  Scalar eta, eps, mu;
  Scalar tau, tau_tilde;
  Scalar log_K;
  int ftilde_sign = 0;
  Scalar log_abs_ftilde = 0;

  static ProbeField make(const SourceSpec& spec, double tau) {
    return with_ftilde(spec, tau, laplace_pulse(spec.pulse, tau, spec.T));
  }

  static ProbeField with_ftilde(const SourceSpec& spec, double tau, double ftilde) {
    using std::log, std::sqrt;
    if (!(tau > 0)) throw Error(ErrorCode::InvalidArgument, "freefield", "tau must be positive");
    ProbeField pf;
    pf.p = spec.p.cast<Scalar>();
    pf.a = spec.a.cast<Scalar>();
    pf.eta = spec.eta;
    pf.eps = spec.eps;
    pf.mu = spec.mu;
    pf.tau = tau;
    pf.tau_tilde = Scalar(tau) * sqrt(Scalar(spec.eps) * Scalar(spec.mu));
    pf.log_K = log(pf.mu) + log(pf.tau) + log_phi(pf.tau_tilde * pf.eta) - 3 * log(pf.tau_tilde);
    pf.ftilde_sign = ftilde > 0 ? 1 : (ftilde < 0 ? -1 : 0);
    pf.log_abs_ftilde = ftilde == 0 ? Scalar(0) : log(Scalar(std::abs(ftilde)));
    return pf;
  }

  Scalar K() const { return std::exp(log_K); }
  Scalar ftilde() const { return ftilde_sign * std::exp(log_abs_ftilde); }
  // log|K f~|
  Scalar log_amplitude() const { return log_K + log_abs_ftilde; }
  Scalar log_scale_at(Scalar r) const { return log_amplitude() - tau_tilde * r; }
};

namespace detail {

template <typename Scalar>
Scalar outside_radius(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  const Scalar r = (x - pf.p).norm();
  if (!(r > pf.eta)) throw Error(ErrorCode::InsideBall, "freefield", "point inside the probe ball");
  return r;
}

}  // namespace detail

template <typename Scalar>
Scaled<Vector3<Scalar>, Scalar> V_field_scaled(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  const Scalar r = detail::outside_radius(x, pf);
  const Vector3<Scalar> w = (x - pf.p) / r;
  const Scalar k = pf.tau_tilde;
  const Scalar g = 1 / r + 1 / (k * r * r);
  const Scalar A = 1 + g / k, B = 1 + 3 * g / k;
  const Vector3<Scalar> Ma = A * pf.a - B * w.dot(pf.a) * w;
  return {Scalar(pf.ftilde_sign) * Ma / r, pf.log_scale_at(r)};
}

template <typename Scalar>
Vector3<Scalar> V_field(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  return V_field_scaled(x, pf).value();
}

template <typename Scalar>
Scaled<Vector3<Scalar>, Scalar> curl_V_scaled(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  const Scalar r = detail::outside_radius(x, pf);
  const Vector3<Scalar> w = (x - pf.p) / r;
  const Scalar k = pf.tau_tilde;
  const Scalar c = -k * (1 + 1 / (k * r)) / r;
  return {Scalar(pf.ftilde_sign) * c * w.cross(pf.a), pf.log_scale_at(r)};
}

template <typename Scalar>
Vector3<Scalar> curl_V(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  return curl_V_scaled(x, pf).value();
}

// Jacobian J_ij = dV_i / dx_j.
template <typename Scalar>
Scaled<Matrix3<Scalar>, Scalar> V_jacobian_scaled(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  using M3 = Matrix3<Scalar>;
  const Scalar r = detail::outside_radius(x, pf);
  const Vector3<Scalar> w = (x - pf.p) / r;
  const Vector3<Scalar>& a = pf.a;
  const Scalar k = pf.tau_tilde;
  const Scalar g = 1 / r + 1 / (k * r * r);
  const Scalar A = 1 + g / k, B = 1 + 3 * g / k;
  const Scalar dA = -1 / (k * r * r) - 2 / (k * k * r * r * r);
  const Scalar dB = 3 * dA;
  const Scalar wa = w.dot(a);
  const M3 I = M3::Identity();
  const Vector3<Scalar> Ma = A * a - B * wa * w;
  const M3 dMa = dA * a * w.transpose() - wa * dB * w * w.transpose() -
                 (B / r) * (wa * I - 2 * wa * w * w.transpose() + w * a.transpose());
  const M3 J = (dMa - (k + 1 / r) * Ma * w.transpose()) / r;
  return {Scalar(pf.ftilde_sign) * J, pf.log_scale_at(r)};
}

template <typename Scalar>
Matrix3<Scalar> V_jacobian(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  return V_jacobian_scaled(x, pf).value();
}

// V inside the ball from the radial solution of (Laplacian - k^2) U = -chi_B:
// U = 1/k^2 - c sinh(kr)/r with c = (1 + k eta) e^{-k eta} / k^3, and V = mu tau f~ (U a - Hess(U) a / k^2).
// Scaled by exp(log|mu tau f~|).
template <typename Scalar>
Scaled<Vector3<Scalar>, Scalar> V_field_interior_scaled(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  using std::exp, std::log, std::sinh;
  const Scalar r = (x - pf.p).norm();
  if (r > pf.eta) throw Error(ErrorCode::InvalidArgument, "freefield", "point outside the probe ball");
  const Scalar k = pf.tau_tilde, xi = k * pf.eta, kr = k * r;
  const Scalar c = (1 + xi) * exp(-xi) / (k * k * k);
  // g = sinh(kr)/r, g1 = g'/r = phi(kr)/r^3, g2 = g'' = k^2 g - 2 g1
  Scalar g, g1;
  if (kr < Scalar(0.5)) {
    Scalar t = 1, s = 0;
    const Scalar x2 = kr * kr;
    for (int n = 0; n < 14; ++n) {
      s += t;
      t *= x2 / Scalar((2 * n + 2) * (2 * n + 3));
    }
    g = k * s;
    Scalar tt = Scalar(1) / 6, s1 = 0;
    for (int n = 1; n < 14; ++n) {
      s1 += Scalar(2 * n) * tt;
      tt *= x2 / Scalar((2 * n + 2) * (2 * n + 3));
    }
    g1 = k * k * k * s1;
  } else {
    g = sinh(kr) / r;
    g1 = phi(kr) / (r * r * r);
  }
  const Scalar g2 = k * k * g - 2 * g1;
  const Scalar U = 1 / (k * k) - c * g;
  Vector3<Scalar> w = Vector3<Scalar>::Zero();
  if (r > 0) w = (x - pf.p) / r;
  const Scalar wa = w.dot(pf.a);
  const Vector3<Scalar> hess_a = -c * (g2 * wa * w + g1 * (pf.a - wa * w));
  const Vector3<Scalar> m = U * pf.a - hess_a / (k * k);
  return {Scalar(pf.ftilde_sign) * m, log(pf.mu * pf.tau) + pf.log_abs_ftilde};
}

template <typename Scalar>
Vector3<Scalar> V_field_interior(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  return V_field_interior_scaled(x, pf).value();
}

// V anywhere: closed form outside the ball, radial solution inside.
template <typename Scalar>
Vector3<Scalar> V_field_anywhere(const Vector3<Scalar>& x, const ProbeField<Scalar>& pf) {
  if ((x - pf.p).norm() > pf.eta) return V_field(x, pf);
  return V_field_interior(x, pf);
}

}  // namespace enclosure
