#include "helpers.hpp"

#include <cmath>
#include <numbers>

using namespace enclosure;
using namespace enclosure::test;
using doctest::Approx;

TEST_CASE("ramped sine values") {
  const Pulse f = Pulse::ramped_sine({1.0, 2.0, 3.0, true});
  CHECK(pulse_value(f, 0.0) == 0.0);
  CHECK(pulse_value(f, std::numbers::pi / 2) == Approx(std::numbers::pi / 2));
  CHECK(f(5.0) == 0.0);
}

TEST_CASE("tabulated pulse interpolates linearly") {
  const Pulse f = Pulse::tabulated({{0.0, 1.0}, {0.0, 2.0}});
  CHECK(pulse_value(f, 0.5, 1.0) == Approx(1.0));
  CHECK(code_of([] { Pulse::tabulated({{0.0, 1.0}, {1.0, 2.0}}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("pulse evaluation outside the window is refused") {
  CHECK(code_of([] { pulse_value(Pulse::ramped_sine({}), 5.0, 4.0); }) == ErrorCode::OutOfWindow);
}

TEST_CASE("Laplace transform of the ramped sine tends to 2 tau omega / (tau^2 + omega^2)^2") {
  const Pulse f = Pulse::ramped_sine({1.0, 50.0, 60.0, false});
  CHECK(laplace_pulse(f, 10.0) == Approx(20.0 / 10201.0).epsilon(1e-10));
  for (double tau : {50.0, 100.0, 200.0})
    CHECK(tau * tau * tau * laplace_pulse(Pulse::ramped_sine({}), tau, 4.0) == Approx(2.0).epsilon(2e-2));
}

TEST_CASE("Laplace transform decays at least like tau^{-3/2}") {
  for (const Pulse& f : {Pulse::ramped_sine({}), Pulse::polynomial_ramp({2, 2.0}),
                         Pulse::tabulated({{0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}})}) {
    double prev = 0;
    for (double tau : {100.0, 400.0, 1600.0}) {
      const double b = std::abs(laplace_pulse(f, tau, 4.0)) * std::pow(tau, 1.5);
      if (prev > 0) CHECK(b <= prev * 1.01);
      prev = b;
    }
  }
}

TEST_CASE("Laplace transform of the tabulated pulse matches quadrature") {
  const Pulse f = Pulse::tabulated({{0.0, 0.5, 1.5}, {0.0, 1.0, -0.5}});
  const double tau = 2.0;
  double s = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double t = 1.5 * (i + 0.5) / n;
    s += f(t) * std::exp(-tau * t) * 1.5 / n;
  }
  CHECK(laplace_pulse(f, tau) == Approx(s).epsilon(1e-8));
}

TEST_CASE("zero pulse transforms to zero") {
  for (double tau : {0.1, 1.0, 50.0}) CHECK(laplace_pulse(Pulse::zero(), tau, 4.0) == 0.0);
}

TEST_CASE("zero net charge taper integrates to zero") {
  const Pulse f = Pulse::ramped_sine({1.0, 1.0, 2.0, true});
  double s = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) s += f(2.0 * (i + 0.5) / n) * 2.0 / n;
  CHECK(std::abs(s) < 1e-9);
}

TEST_CASE("source validation on the sphere testbed") {
  const SourceDiagnostics dg = validate_source(sphere_testbed_source(), unit_sphere());
  CHECK(dg.dist == Approx(1.75));
  CHECK(dg.T_required == Approx(3.5));
  CHECK(dg.window_ok);
  REQUIRE(dg.reflectors.size() == 1);
  CHECK(dg.reflectors[0].nondegenerate);
}

TEST_CASE("polarization along the reflector normal is flagged") {
  SourceSpec s = sphere_testbed_source();
  s.a = Vec3::UnitX();
  const SourceDiagnostics dg = validate_source(s, unit_sphere());
  REQUIRE(dg.reflectors.size() == 1);
  CHECK_FALSE(dg.reflectors[0].nondegenerate);
  CHECK_FALSE(dg.warnings.empty());
}

TEST_CASE("probe ball inside or touching the obstacle is an overlap") {
  SourceSpec s = sphere_testbed_source();
  s.p = Vec3(0.2, 0, 0);
  CHECK(code_of([&] { validate_source(s, unit_sphere()); }) == ErrorCode::Overlap);
  s.p = Vec3(1.25, 0, 0);
  CHECK(code_of([&] { validate_source(s, unit_sphere()); }) == ErrorCode::Overlap);
}
