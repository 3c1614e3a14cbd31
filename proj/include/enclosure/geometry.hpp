#pragma once

#include "enclosure/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace enclosure {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

// Local coordinates y = frame^T (x - center); columns of frame are the principal axes.
struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Vec3 semiaxes = Vec3::Ones();
  Mat3 frame = Mat3::Identity();
};

struct SphereUnion {
  std::vector<Sphere> spheres;
};

struct NoObstacle {};

class Obstacle {
 public:
  using Shape = std::variant<NoObstacle, Sphere, Ellipsoid, SphereUnion>;

  static Obstacle none();
  static Obstacle sphere(const Vec3& center, double radius);
  static Obstacle ellipsoid(const Vec3& center, const Vec3& semiaxes, const Mat3& frame = Mat3::Identity());
  static Obstacle sphere_union(std::vector<Sphere> spheres);

  const Shape& shape() const { return shape_; }
  bool empty() const { return std::holds_alternative<NoObstacle>(shape_); }
  // Convex pieces as ellipsoids; a sphere is an ellipsoid with equal semiaxes.
  std::vector<Ellipsoid> components() const;
  std::string describe() const;

 private:
  explicit Obstacle(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

struct SurfacePoint {
  Vec3 q = Vec3::Zero();
  Vec3 nu = Vec3::UnitX();
  Mat32 tangent_frame = Mat32::Zero();
  Mat2 shape = Mat2::Zero();
  int component = 0;
};

struct TubularParams {
  double delta0 = 0;
};

struct Curvatures {
  double K = 0;
  double H = 0;
};

struct ReflectionMap {
  Vec3 x_r;
  double d = 0;
  double s = 0;  // signed: positive outside D
  Vec3 n;
  Mat3 pi;
  Mat3 n_prime;
};

double signed_distance(const Obstacle& obstacle, const Vec3& x);
bool contains(const Obstacle& obstacle, const Vec3& x);

SurfacePoint nearest_point(const Obstacle& obstacle, const Vec3& x, double tol = 1e-10);
std::vector<SurfacePoint> first_reflector(const Obstacle& obstacle, const Vec3& p, double tol = 1e-8);

// Builds the full surface frame at a point already on component `component` of the boundary.
SurfacePoint surface_point(const Obstacle& obstacle, const Vec3& q, int component);

// S = -d(nu) with nu the outward normal, expressed in q.tangent_frame.
Mat2 shape_operator(const Obstacle& obstacle, const SurfacePoint& q);

template <typename Scalar>
Matrix2<Scalar> observation_sphere_shape(Scalar d) {
  return Matrix2<Scalar>::Identity() / d;
}

template <typename Scalar>
std::pair<Scalar, Scalar> curvature_invariants_of(const Matrix2<Scalar>& S) {
  return {S.determinant(), S.trace() / Scalar(2)};
}

inline Curvatures curvature_invariants(const Mat2& S) {
  auto [K, H] = curvature_invariants_of<double>(S);
  return {K, H};
}

TubularParams tubular_params(const Obstacle& obstacle);
double min_curvature_radius(const Obstacle& obstacle);

ReflectionMap reflection_map(const Obstacle& obstacle, const Vec3& x);
// Same map without the collar check, defined on both sides of the boundary.
ReflectionMap reflection_map_unchecked(const Obstacle& obstacle, const Vec3& x);

// Deterministic near-uniform boundary samples (Fibonacci lattice per component).
std::vector<Vec3> surface_samples(const Obstacle& obstacle, int count);

// Number of well-separated boundary points within (1 + rel_tol) of the minimal distance from p.
int count_near_minimizers(const Obstacle& obstacle, const Vec3& p, double rel_tol);

inline constexpr int kContinuumThreshold = 64;

}  // namespace enclosure
