#pragma once

#include <cmath>
#include <limits>

namespace enclosure {

// Sign plus log-magnitude; zero is sign 0 with log_abs = -inf.
template <typename Scalar = double>
struct SignedLog {
  int sign = 0;
  Scalar log_abs = -std::numeric_limits<Scalar>::infinity();

  static SignedLog from_value(Scalar v) {
    if (v == Scalar(0)) return {};
    return {v > 0 ? 1 : -1, std::log(std::abs(v))};
  }
  Scalar value() const { return sign == 0 ? Scalar(0) : Scalar(sign) * std::exp(log_abs); }

  friend SignedLog operator*(const SignedLog& x, const SignedLog& y) {
    if (x.sign == 0 || y.sign == 0) return {};
    return {x.sign * y.sign, x.log_abs + y.log_abs};
  }
  friend SignedLog operator/(const SignedLog& x, const SignedLog& y) {
    if (x.sign == 0) return {};
    return {x.sign * y.sign, x.log_abs - y.log_abs};
  }
};

// A quantity held as mantissa * exp(log_scale) so exponentially small fields
// keep full relative precision.
template <typename T, typename Scalar = double>
struct Scaled {
  T mantissa;
  Scalar log_scale = 0;

  T value() const { return T(mantissa * std::exp(log_scale)); }
  // Value re-expressed relative to exp(reference).
  T relative_to(Scalar reference) const { return T(mantissa * std::exp(log_scale - reference)); }
};

}  // namespace enclosure
