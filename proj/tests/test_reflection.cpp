#include "helpers.hpp"

#include "enclosure/reflection.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

using namespace enclosure;
using namespace enclosure::test;
using doctest::Approx;

namespace {

// Huge sphere touching x = 1: locally flat with a collar far wider than any step used here.
Obstacle flat_wall(double radius = 1e6) { return Obstacle::sphere(Vec3(1 - radius, 0, 0), radius); }

ResidualFit residual_fit(const ReflectedField& f, const Obstacle& D, int points, double h_fd) {
  std::vector<ResidualReport> reports;
  for (const auto& x : surface_samples(D, points)) {
    const SurfacePoint sp = nearest_point(D, x);
    for (double off : {0.0, 0.05, 0.1, 0.2}) reports.push_back(residual_structure(f, sp.q + off * sp.nu, h_fd));
  }
  return fit_residual_bound(reports);
}

}  // namespace

TEST_CASE("tangential trace of the reflected field is exact") {
  const auto samples = surface_samples(unit_sphere(), 500);
  for (double tau : {5.0, 20.0, 80.0}) {
    const ReflectedField f = make_reflected_field(unit_sphere(), sphere_testbed_source(), tau);
    CHECK(check_tangential_trace(f, samples).relative() <= 1e-12);
  }
  std::mt19937_64 rng(31);
  const Obstacle e = Obstacle::ellipsoid(Vec3::Zero(), Vec3(1.3, 1, 0.8), Eigen::AngleAxisd(0.5, Vec3::UnitY()).matrix());
  for (int k = 0; k < 4; ++k) {
    SourceSpec s = sphere_testbed_source();
    s.a = random_unit(rng);
    const ReflectedField f = make_reflected_field(e, s, 3.0 + 9 * k);
    CHECK(check_tangential_trace(f, surface_samples(e, 200)).relative() <= 1e-12);
  }
}

TEST_CASE("a perturbed reflection point breaks the trace identity at first order") {
  const ReflectedField f = make_reflected_field(unit_sphere(), sphere_testbed_source(), 5.0);
  const auto samples = surface_samples(unit_sphere(), 100);
  const double a = check_tangential_trace(f, samples, 1e-3).relative();
  const double b = check_tangential_trace(f, samples, 5e-4).relative();
  CHECK(a > 1e-8);
  CHECK(a / b == Approx(2.0).epsilon(0.1));
}

TEST_CASE("reflection of a purely normal field keeps its normal part") {
  BaseField radial;
  radial.value = [](const Vec3& y) -> Vec3 { return y; };
  radial.jacobian = [](const Vec3&) -> Mat3 { return Mat3::Identity(); };
  const ReflectedField f = make_reflected_field(unit_sphere(), radial);
  const Vec3 x = 1.15 * Vec3(1, 2, -2).normalized();
  CHECK((reflect(f, x) - 0.85 * Vec3(1, 2, -2).normalized()).norm() < 1e-12);
}

TEST_CASE("reflection across a flat boundary has no curvature term") {
  const Obstacle flat = flat_wall();
  SourceSpec s = sphere_testbed_source();
  s.a = Vec3(0.3, 0.4, 0.866).normalized();
  const ReflectedField f = make_reflected_field(flat, s, 4.0);
  const Vec3 x(1.1, 0.2, -0.1);
  const ReflectionMap m = reflection_map(flat, x);
  const Vec3 V = f.base.value(m.x_r);
  const Vec3 B = m.pi * V;
  CHECK((reflect(f, x) - (-(V - B) + B)).norm() < 1e-5 * V.norm());
}

TEST_CASE("curl trace converges under step refinement") {
  const auto samples = surface_samples(unit_sphere(), 500);
  const ReflectedField f = make_reflected_field(unit_sphere(), sphere_testbed_source(), 10.0);
  const CurlTraceReport r = check_curl_trace(f, samples, 1e-3);
  CHECK(r.relative <= 5e-3);
  CHECK(r.order >= 0.8);
  CHECK(r.scale > 0);
}

TEST_CASE("curl trace is uniform in tau at a fixed step per wavelength") {
  const auto samples = surface_samples(unit_sphere(), 200);
  const CurlTraceReport a =
      check_curl_trace(make_reflected_field(unit_sphere(), sphere_testbed_source(), 10.0), samples, 2e-3);
  const CurlTraceReport b =
      check_curl_trace(make_reflected_field(unit_sphere(), sphere_testbed_source(), 20.0), samples, 1e-3);
  CHECK(b.relative == Approx(a.relative).epsilon(0.3));
}

TEST_CASE("flat boundary curl trace collapses to difference noise") {
  // Smaller radius here: difference stencils on a 1e6 sphere lose the sign of the distance to roundoff.
  const Obstacle flat = flat_wall(1e4);
  const Vec3 c(1 - 1e4, 0, 0);
  std::vector<Vec3> on_flat, on_round;
  for (int i = 0; i < 50; ++i) {
    const Vec3 y(1, 0.02 * (i % 7) - 0.06, 0.015 * (i / 7) - 0.05);
    on_flat.push_back(c + 1e4 * (y - c).normalized());
    on_round.push_back(y.normalized());
  }
  const CurlTraceReport flat_r = check_curl_trace(make_reflected_field(flat, sphere_testbed_source(), 10.0), on_flat, 1e-3);
  const CurlTraceReport round_r =
      check_curl_trace(make_reflected_field(unit_sphere(), sphere_testbed_source(), 10.0), on_round, 1e-3);
  CHECK(flat_r.relative < 0.1 * round_r.relative);
}

TEST_CASE("residual on the boundary is bounded by the first-order part alone") {
  const ReflectedField f = make_reflected_field(unit_sphere(), sphere_testbed_source(), 10.0);
  for (const auto& x : surface_samples(unit_sphere(), 30)) {
    const ResidualReport r = residual_structure(f, x, 2.5e-4);
    CHECK(r.d == Approx(0.0));
    CHECK(r.residual <= 1e-3 * r.first_order);
  }
}

TEST_CASE("residual coefficients are uniform in tau") {
  std::vector<double> c2;
  for (double tau : {10.0, 20.0, 40.0}) {
    const ResidualFit fit = residual_fit(make_reflected_field(unit_sphere(), sphere_testbed_source(), tau), unit_sphere(), 20, 5e-4);
    CHECK(fit.C1 <= 1e-3);
    c2.push_back(fit.C2);
  }
  const auto [lo, hi] = std::minmax_element(c2.begin(), c2.end());
  CHECK(*hi <= 1.2 * *lo);
  CHECK(*lo > 0);
}

TEST_CASE("flat boundary residual collapses") {
  const Obstacle flat = flat_wall();
  const ReflectedField f = make_reflected_field(flat, sphere_testbed_source(), 10.0);
  const ReflectedField g = make_reflected_field(unit_sphere(), sphere_testbed_source(), 10.0);
  for (double d : {0.05, 0.1}) {
    const ResidualReport rf = residual_structure(f, Vec3(1 + d, 0.03, -0.02), 5e-4);
    const ResidualReport rg = residual_structure(g, Vec3(1 + d, 0.03, -0.02).normalized() * (1 + d), 5e-4);
    CHECK(rf.residual / (rf.first_order + rf.second_order) < 0.01 * rg.residual / (rg.first_order + rg.second_order));
  }
}

TEST_CASE("reflection input checks") {
  const ReflectedField f = make_reflected_field(unit_sphere(), sphere_testbed_source(), 10.0);
  CHECK(code_of([&] { reflect(f, Vec3(0.9, 0, 0)); }) == ErrorCode::NotExterior);
  CHECK(code_of([&] { check_curl_trace(f, surface_samples(unit_sphere(), 10), 0.5); }) == ErrorCode::StepTooLarge);
  CHECK(default_fd_step(unit_sphere()) <= 2e-3);
}
