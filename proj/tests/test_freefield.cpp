#include "helpers.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace enclosure;
using namespace enclosure::test;
using doctest::Approx;

namespace {

ProbeField<double> field(const SourceSpec& s, double tau) { return ProbeField<double>::make(s, tau); }

Mat3 fd_jacobian(const ProbeField<double>& pf, const Vec3& x, double h) {
  Mat3 J;
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = h * Vec3::Unit(j);
    J.col(j) = (V_field(Vec3(x + e), pf) - V_field(Vec3(x - e), pf)) / (2 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("phi special values and growth") {
  CHECK(phi(0.0) == 0.0);
  CHECK(phi(1.0) == Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(phi(0.3) == Approx(0.3 * std::cosh(0.3) - std::sinh(0.3)).epsilon(1e-13));
  CHECK(phi(-0.7) == Approx(-phi(0.7)));
  for (double xi : {10.0, 100.0, 600.0}) CHECK(std::exp(log_phi(xi) - std::log(xi / 2) - xi) == Approx(1.0).epsilon(1.1 / xi));
  CHECK(std::isfinite(log_phi(1e4)));
}

TEST_CASE("mean value kernel closed form") {
  SourceSpec s;
  s.p = Vec3::Zero();
  s.eta = 0.25;
  CHECK(mean_value_kernel(Vec3(2, 0, 0), s, 4.0) == Approx(phi(1.0) / 64 * std::exp(-8.0) / 2));
  // Small tau~: |B| / (4 pi r) = eta^3 / (3 r).
  CHECK(mean_value_kernel(Vec3(0, 1.5, 0), s, 1e-4) == Approx(std::pow(0.25, 3) / 4.5).epsilon(1e-6));
  CHECK(code_of([&] { mean_value_kernel(Vec3(0.1, 0, 0), s, 1.0); }) == ErrorCode::InsideBall);
}

TEST_CASE("mean value kernel matches ball quadrature at random points") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 10; ++k) {
    const double eta = 0.1 + 0.4 * U(rng), tt = 0.5 + 9.5 * U(rng);
    const Vec3 p = Vec3(U(rng), U(rng), U(rng));
    const Vec3 x = p + eta * (2 + 3 * U(rng)) * random_unit(rng);
    CHECK(mean_value_kernel<double>(x, p, eta, tt) ==
          Approx(ball_kernel_quadrature(x, p, eta, tt)).epsilon(1e-6));
  }
}

TEST_CASE("V along and across the polarization") {
  SourceSpec s;
  s.a = Vec3::UnitZ();
  const auto pf = field(s, 3.0);
  const double k = pf.tau_tilde;
  auto coeffs = [&](double r) {
    const double g = 1 / r + 1 / (k * r * r);
    return std::pair{1 + g / k, 1 + 3 * g / k};
  };
  const double r = 1.3;
  const double v = std::exp(-k * r) / r;
  const double pref = pf.K() * pf.ftilde() * v;
  const auto [A, B] = coeffs(r);
  const Vec3 across = V_field(Vec3(r, 0, 0), pf);
  CHECK(across.head<2>().norm() < 1e-14 * across.norm());
  CHECK(across.z() == Approx(pref * A));
  const Vec3 along = V_field(Vec3(0, 0, r), pf);
  CHECK(along.head<2>().norm() < 1e-14 * along.norm());
  CHECK(along.z() == Approx(pref * (A - B)));
}

TEST_CASE("V matches the volume-potential construction") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 4; ++k) {
    SourceSpec s;
    s.a = random_unit(rng);
    s.eta = 0.3;
    const auto pf = field(s, 2.0 + k);
    const Vec3 x = (0.8 + 0.3 * k) * random_unit(rng);
    const Vec3 ref = V_by_quadrature(x, pf, 1e-3, 40);
    CHECK((V_field(x, pf) - ref).norm() <= 1e-5 * ref.norm());
  }
}

TEST_CASE("curl of V matches central differences and is normal to omega and a") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    SourceSpec s;
    s.a = random_unit(rng);
    const auto pf = field(s, 1.0 + 0.2 * k);
    const Vec3 x = (0.5 + 0.1 * k) * random_unit(rng);
    const Mat3 J = fd_jacobian(pf, x, 1e-4);
    const Vec3 fd(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
    const Vec3 c = curl_V(x, pf);
    // Difference roundoff scales with the field, not with the (partly cancelling) curl.
    CHECK((c - fd).norm() <= 1e-6 * (c.norm() + pf.tau_tilde * V_field(x, pf).norm()));
    const Vec3 w = x.normalized();
    CHECK(std::abs(c.dot(w)) <= 1e-12 * c.norm());
    CHECK(std::abs(c.dot(s.a)) <= 1e-12 * c.norm());
  }
  SourceSpec s;
  s.a = Vec3::UnitX();
  CHECK(curl_V(Vec3(2, 0, 0), field(s, 5.0)).norm() == 0.0);
}

TEST_CASE("curl of V scales like tau~ |V| at large tau") {
  SourceSpec s;
  const Vec3 x(1.5, 0, 0);
  for (double tau : {50.0, 200.0, 800.0}) {
    const auto pf = field(s, tau);
    const double ratio = curl_V_scaled(x, pf).mantissa.norm() / (pf.tau_tilde * V_field_scaled(x, pf).mantissa.norm());
    CHECK(ratio == Approx(1.0).epsilon(2.0 / tau));
  }
}

TEST_CASE("Jacobian of V matches central differences") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 20; ++k) {
    SourceSpec s;
    s.a = random_unit(rng);
    const auto pf = field(s, 0.5 + k);
    const Vec3 x = (0.5 + 0.1 * k) * random_unit(rng);
    const Mat3 J = V_jacobian(x, pf);
    CHECK((J - fd_jacobian(pf, x, 1e-4 / (1 + 0.1 * k))).norm() <= 1e-5 * J.norm());
  }
}

TEST_CASE("leading Jacobian term cancels against V") {
  SourceSpec s;
  s.a = Vec3(0, 0.6, 0.8);
  const Vec3 x(1.7, 0.2, 0);
  double prev = 1e300;
  for (double tau : {10.0, 40.0, 160.0, 640.0}) {
    const auto pf = field(s, tau);
    const auto V = V_field_scaled(x, pf);
    const auto J = V_jacobian_scaled(x, pf);
    const double ratio = (J.mantissa * V.mantissa).norm() / (pf.tau_tilde * V.mantissa.squaredNorm());
    CHECK(ratio < prev);
    prev = ratio;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("free-field residual converges at second order") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 20; ++k) {
    SourceSpec s;
    s.a = random_unit(rng);
    s.eps = 1.0 + 0.1 * (k % 3);
    const auto pf = field(s, 3.0);
    const Vec3 x = (0.75 + 0.05 * k) * random_unit(rng);
    auto V = [&](const Vec3& y) -> Vec3 { return V_field(y, pf); };
    const double scale = pf.tau * pf.tau * V(x).norm();
    const double r1 = maxwell_residual(V, x, 0.02, s.eps * s.mu, pf.tau).norm() / scale;
    const double r2 = maxwell_residual(V, x, 0.01, s.eps * s.mu, pf.tau).norm() / scale;
    CHECK(std::log2(r1 / r2) == Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("V is finite deep in the exponential regime") {
  SourceSpec s;
  const auto pf = field(s, 500.0);
  const auto V = V_field_scaled(Vec3(2, 0, 0), pf);
  CHECK(V.mantissa.allFinite());
  CHECK(std::isfinite(V.log_scale));
  CHECK(V.log_scale < -700);
}

TEST_CASE("tangential part of V is continuous across the ball surface") {
  SourceSpec s;
  s.a = Vec3(0.3, 0.4, 0.5).normalized();
  const auto pf = field(s, 4.0);
  const Vec3 w = Vec3(1, 2, 2).normalized();
  const Vec3 in = V_field_interior(Vec3(0.2499999 * w), pf);
  const Vec3 out = V_field(Vec3(0.2500001 * w), pf);
  // The normal part jumps with the source; the tangential part does not.
  CHECK((in - out).cross(w).norm() < 1e-5 * out.norm());
}
