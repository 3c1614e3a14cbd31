#include "helpers.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

using namespace enclosure;
using namespace enclosure::test;
using doctest::Approx;

namespace {

// Dense (theta, phi) scan of an axis-aligned ellipsoid surface.
std::pair<double, Vec3> brute_nearest(const Vec3& e, const Vec3& x, int n = 1500) {
  double best = 1e300;
  Vec3 arg;
  for (int i = 0; i <= n; ++i) {
    const double th = std::numbers::pi * i / n;
    for (int j = 0; j < 2 * n; ++j) {
      const double ph = std::numbers::pi * j / n;
      const Vec3 y(e.x() * std::sin(th) * std::cos(ph), e.y() * std::sin(th) * std::sin(ph), e.z() * std::cos(th));
      const double d = (y - x).norm();
      if (d < best) best = d, arg = y;
    }
  }
  return {best, arg};
}

}  // namespace

TEST_CASE("signed distance of a sphere is radial") {
  CHECK(signed_distance(unit_sphere(), Vec3(2, 0, 0)) == Approx(1.0));
  CHECK(signed_distance(unit_sphere(), Vec3(0.5, 0, 0)) == Approx(-0.5));
}

TEST_CASE("ellipsoid distance matches a brute-force surface scan") {
  const Obstacle e = Obstacle::ellipsoid(Vec3::Zero(), Vec3(2, 1, 1));
  CHECK(signed_distance(e, Vec3(3, 0, 0)) == Approx(1.0).epsilon(1e-10));
  std::mt19937_64 rng(7);
  for (int k = 0; k < 5; ++k) {
    const Vec3 x = 2.5 * random_unit(rng);
    const auto [d, q] = brute_nearest(Vec3(2, 1, 1), x, 600);
    CHECK(signed_distance(e, x) == Approx(d).epsilon(1e-4));
    CHECK((nearest_point(e, x).q - q).norm() < 2e-2);
  }
}

TEST_CASE("nearest point of a sphere and its ambiguous center") {
  const SurfacePoint sp = nearest_point(unit_sphere(), Vec3(2, 0, 0));
  CHECK((sp.q - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((sp.nu - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK(code_of([] { nearest_point(unit_sphere(), Vec3::Zero()); }) == ErrorCode::AmbiguousProjection);
}

TEST_CASE("nearest point on the ellipsoid from the side") {
  const Obstacle e = Obstacle::ellipsoid(Vec3::Zero(), Vec3(2, 1, 1));
  CHECK((nearest_point(e, Vec3(0, 2, 0)).q - Vec3(0, 1, 0)).norm() < 1e-9);
}

TEST_CASE("first reflector of one and two spheres") {
  const auto one = first_reflector(unit_sphere(), Vec3(3, 0, 0));
  REQUIRE(one.size() == 1);
  CHECK((one[0].q - Vec3(1, 0, 0)).norm() < 1e-10);

  const Obstacle two = Obstacle::sphere_union({{Vec3(3, 0, 0), 1.0}, {Vec3(-3, 0, 0), 1.0}});
  auto pts = first_reflector(two, Vec3::Zero());
  REQUIRE(pts.size() == 2);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.q.x() < b.q.x(); });
  CHECK((pts[0].q - Vec3(-2, 0, 0)).norm() < 1e-10);
  CHECK((pts[1].q - Vec3(2, 0, 0)).norm() < 1e-10);

  CHECK(code_of([] { first_reflector(unit_sphere(), Vec3::Zero()); }) == ErrorCode::ContinuumReflector);
}

TEST_CASE("sphere shape operator gives det(S_B - S_D) = (1/d + 1/R)^2") {
  for (double R : {0.5, 1.0, 2.0}) {
    const Obstacle s = Obstacle::sphere(Vec3::Zero(), R);
    const Vec3 p(R + 1.5, 0.3, -0.2);
    const SurfacePoint sp = nearest_point(s, p);
    const double d = (p - sp.q).norm();
    const Mat2 S = shape_operator(s, sp);
    CHECK((S + Mat2::Identity() / R).norm() < 1e-12);
    CHECK((observation_sphere_shape(d) - S).determinant() == Approx(std::pow(1 / d + 1 / R, 2)));
  }
  CHECK((observation_sphere_shape(2.0) - 0.5 * Mat2::Identity()).norm() == 0);
}

TEST_CASE("flattened ellipsoid has a vanishing shape operator at the pole") {
  double last = 1e300;
  for (double big : {10.0, 100.0, 1000.0}) {
    const Obstacle e = Obstacle::ellipsoid(Vec3::Zero(), Vec3(1, big, big));
    const Mat2 S = shape_operator(e, nearest_point(e, Vec3(3, 0, 0)));
    CHECK(S.norm() < last);
    last = S.norm();
  }
  CHECK(last < 2e-3);
}

TEST_CASE("ellipsoid shape operator at the tip of the long axis") {
  const Obstacle e = Obstacle::ellipsoid(Vec3::Zero(), Vec3(2, 1, 1));
  const Curvatures c = curvature_invariants(shape_operator(e, nearest_point(e, Vec3(4, 0, 0))));
  CHECK(c.K == Approx(4.0));
  CHECK(c.H == Approx(-2.0));
}

TEST_CASE("curvature invariants") {
  Curvatures c = curvature_invariants(0.5 * Mat2::Identity());
  CHECK(c.K == Approx(0.25));
  CHECK(c.H == Approx(0.5));
  c = curvature_invariants(Mat2::Zero());
  CHECK(c.K == 0);
  CHECK(c.H == 0);
  c = curvature_invariants(Eigen::Vector2d(3, -2).asDiagonal());
  CHECK(c.K == Approx(-6));
  CHECK(c.H == Approx(0.5));
}

TEST_CASE("reflection map of the sphere") {
  const ReflectionMap m = reflection_map(unit_sphere(), Vec3(1.2, 0, 0));
  CHECK((m.x_r - Vec3(0.8, 0, 0)).norm() < 1e-12);
  CHECK(m.d == Approx(0.2));
  CHECK((m.n - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((m.pi - Vec3(1, 0, 0) * Vec3(1, 0, 0).transpose()).norm() < 1e-12);

  const ReflectionMap on = reflection_map(unit_sphere(), Vec3(0, 1, 0));
  CHECK((on.x_r - Vec3(0, 1, 0)).norm() < 1e-12);
  CHECK(on.d == Approx(0.0));
}

TEST_CASE("n' is the Jacobian of the outward normal field") {
  // Sphere: spectrum {0, 1/1.2, 1/1.2} on {n, tangents}.
  const Vec3 x(1.2, 0, 0);
  const ReflectionMap m = reflection_map(unit_sphere(), x);
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (m.n_prime + m.n_prime.transpose()));
  CHECK(es.eigenvalues()(0) == Approx(0.0).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == Approx(1 / 1.2));
  CHECK(es.eigenvalues()(2) == Approx(1 / 1.2));
  CHECK((m.n_prime * m.n).norm() < 1e-12);

  // Ellipsoid: central differences of n(x) = nu(nearest point).
  const Obstacle e = Obstacle::ellipsoid(Vec3::Zero(), Vec3(2, 1.2, 1), Eigen::AngleAxisd(0.3, Vec3::UnitZ()).matrix());
  std::mt19937_64 rng(3);
  for (int k = 0; k < 6; ++k) {
    const SurfacePoint sp = nearest_point(e, 1.5 * random_unit(rng));
    const Vec3 y = sp.q + 0.1 * sp.nu;
    const ReflectionMap my = reflection_map(e, y);
    Mat3 J;
    const double h = 1e-5;
    for (int j = 0; j < 3; ++j) {
      const Vec3 dx = h * Vec3::Unit(j);
      J.col(j) = (nearest_point(e, y + dx, 1e-14).nu - nearest_point(e, y - dx, 1e-14).nu) / (2 * h);
    }
    CHECK((my.n_prime - J).norm() < 1e-6 * std::max(1.0, J.norm()));
  }
}

TEST_CASE("reflection outside the collar is refused") {
  CHECK(code_of([] { reflection_map(unit_sphere(), Vec3(3.5, 0, 0)); }) == ErrorCode::OutsideCollar);
  const Obstacle e = Obstacle::ellipsoid(Vec3::Zero(), Vec3(2, 1, 1));  // collar 2 b^2 / a = 1
  CHECK(code_of([&] { reflection_map(e, Vec3(0, 0, 2.1)); }) == ErrorCode::OutsideCollar);
}

TEST_CASE("nearest point projection is idempotent and normal is unit") {
  const Obstacle e = Obstacle::ellipsoid(Vec3(0.3, -0.1, 0.2), Vec3(1.5, 1, 0.7));
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const Vec3 x = Vec3(0.3, -0.1, 0.2) + 3 * random_unit(rng);
    const SurfacePoint sp = nearest_point(e, x);
    CHECK(std::abs(sp.nu.norm() - 1) < 1e-12);
    CHECK(std::abs(signed_distance(e, sp.q)) < 1e-9);
    CHECK((nearest_point(e, sp.q + 0.05 * sp.nu).q - sp.q).norm() < 1e-8);
    CHECK((x - sp.q).cross(sp.nu).norm() < 1e-8);
  }
}
