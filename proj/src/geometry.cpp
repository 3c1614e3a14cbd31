#include "enclosure/geometry.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace enclosure {
namespace {

constexpr const char* kModule = "geometry";
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_round(const Ellipsoid& e) {
  return e.semiaxes.maxCoeff() - e.semiaxes.minCoeff() <= 1e-15 * e.semiaxes.maxCoeff();
}

struct Projection {
  Vec3 local = Vec3::Zero();
  double distance = kInf;
  bool inside = false;
  bool ambiguous = false;
};

// Nearest point on the axis-aligned ellipsoid sum (y_i/e_i)^2 = 1. Critical points of the
// distance satisfy y_i = e_i^2 z_i / (e_i^2 + t); the global minimizer is either the root of
// the secular equation on the branch right of the largest pole, or sits at a pole t = -e_j^2
// when z_j = 0 (then it comes with a mirror image and the projection is not unique).
Projection project_local(const Vec3& e, const Vec3& x, double tol) {
  const double scale = e.maxCoeff();
  const Vec3 z = x.cwiseAbs();
  std::array<bool, 3> zero{};
  for (int i = 0; i < 3; ++i) zero[i] = z[i] <= 1e-14 * scale;

  struct Candidate {
    Vec3 y;
    int mirror_axis;
  };
  std::vector<Candidate> candidates;

  double m = kInf, ez = 0, zeta = kInf;
  for (int i = 0; i < 3; ++i) {
    if (zero[i]) continue;
    m = std::min(m, e[i] * e[i]);
    ez += e[i] * e[i] * z[i] * z[i];
  }
  if (m < kInf) {
    for (int i = 0; i < 3; ++i)
      if (!zero[i] && e[i] * e[i] <= m * (1 + 1e-15)) zeta = std::min(zeta, 0.5 * e[i] * z[i]);
    auto F = [&](double t) {
      double s = -1;
      for (int i = 0; i < 3; ++i) {
        if (zero[i]) continue;
        const double r = e[i] * z[i] / (t + e[i] * e[i]);
        s += r * r;
      }
      return s;
    };
    const double lo = -m + zeta, hi = -m + std::sqrt(ez);
    double t;
    const double flo = F(lo), fhi = F(hi);
    if (fhi >= 0) {
      t = hi;
    } else {
      std::uintmax_t iters = 300;
      auto r = boost::math::tools::toms748_solve(F, lo, hi, flo, fhi,
                                                 boost::math::tools::eps_tolerance<double>(52), iters);
      t = 0.5 * (r.first + r.second);
    }
    Vec3 y = Vec3::Zero();
    for (int i = 0; i < 3; ++i)
      if (!zero[i]) y[i] = e[i] * e[i] * z[i] / (t + e[i] * e[i]);
    candidates.push_back({y, -1});
  }
  for (int j = 0; j < 3; ++j) {
    if (!zero[j]) continue;
    Vec3 y = Vec3::Zero();
    double rem = 1;
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
      if (zero[i]) continue;
      const double denom = e[i] * e[i] - e[j] * e[j];
      if (std::abs(denom) <= 1e-14 * scale * scale) {
        ok = false;
        break;
      }
      y[i] = e[i] * e[i] * z[i] / denom;
      rem -= (y[i] / e[i]) * (y[i] / e[i]);
    }
    if (!ok || rem <= 0) continue;
    y[j] = e[j] * std::sqrt(rem);
    candidates.push_back({y, j});
  }

  Projection out;
  out.inside = x.cwiseQuotient(e).squaredNorm() < 1;
  int best = -1;
  for (int c = 0; c < static_cast<int>(candidates.size()); ++c) {
    const double dist = (candidates[c].y - z).norm();
    if (dist < out.distance) {
      out.distance = dist;
      best = c;
    }
  }
  const Candidate& b = candidates[best];
  const double sep = std::max(tol, 1e-9) * scale;
  if (b.mirror_axis >= 0 && b.y[b.mirror_axis] > sep) out.ambiguous = true;
  for (const auto& c : candidates) {
    if (&c == &b) continue;
    if ((c.y - z).norm() <= out.distance + tol * scale && (c.y - b.y).norm() > sep) out.ambiguous = true;
  }
  out.local = b.y;
  for (int i = 0; i < 3; ++i)
    if (x[i] < 0) out.local[i] = -out.local[i];
  return out;
}

Projection project_component(const Ellipsoid& c, const Vec3& x, double tol) {
  if (is_round(c)) {
    const double R = c.semiaxes[0];
    const Vec3 r = c.frame.transpose() * (x - c.center);
    const double rn = r.norm();
    Projection out;
    out.inside = rn < R;
    out.distance = std::abs(rn - R);
    if (rn <= tol * R) {
      out.ambiguous = true;
      out.local = Vec3(R, 0, 0);
    } else {
      out.local = r * (R / rn);
    }
    return out;
  }
  return project_local(c.semiaxes, c.frame.transpose() * (x - c.center), tol);
}

SurfacePoint frame_at(const Ellipsoid& c, const Vec3& local, int component) {
  SurfacePoint sp;
  sp.component = component;
  const Vec3& e = c.semiaxes;
  Vec3 nu_l;
  double gnorm;
  if (is_round(c)) {
    nu_l = local.normalized();
    gnorm = 1.0 / e[0];
  } else {
    const Vec3 g = local.cwiseQuotient(e.cwiseProduct(e));
    gnorm = g.norm();
    nu_l = g / gnorm;
  }
  int axis;
  nu_l.cwiseAbs().minCoeff(&axis);
  Vec3 t1 = Vec3::Unit(axis) - nu_l[axis] * nu_l;
  t1.normalize();
  const Vec3 t2 = nu_l.cross(t1);
  Mat32 Tl;
  Tl << t1, t2;
  if (is_round(c)) {
    sp.shape = -Mat2::Identity() / e[0];
  } else {
    const Vec3 inv2 = e.cwiseProduct(e).cwiseInverse();
    sp.shape = -(Tl.transpose() * inv2.asDiagonal() * Tl) / gnorm;
    sp.shape = 0.5 * (sp.shape + sp.shape.transpose()).eval();
  }
  sp.q = c.center + c.frame * local;
  sp.nu = c.frame * nu_l;
  sp.tangent_frame = c.frame * Tl;
  return sp;
}

double component_signed_distance(const Ellipsoid& c, const Vec3& x) {
  if (is_round(c)) return (x - c.center).norm() - c.semiaxes[0];
  const Projection p = project_component(c, x, 1e-12);
  return p.inside ? -p.distance : p.distance;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(ErrorCode::InvalidArgument, kModule, msg);
}

}  // namespace

Obstacle Obstacle::none() { return Obstacle(NoObstacle{}); }

Obstacle Obstacle::sphere(const Vec3& center, double radius) {
  require(radius > 0, "sphere radius must be positive");
  return Obstacle(Sphere{center, radius});
}

Obstacle Obstacle::ellipsoid(const Vec3& center, const Vec3& semiaxes, const Mat3& frame) {
  require(semiaxes.minCoeff() > 0, "semiaxes must be positive");
  require((frame.transpose() * frame - Mat3::Identity()).norm() < 1e-10 && frame.determinant() > 0,
          "ellipsoid frame must be a rotation");
  return Obstacle(Ellipsoid{center, semiaxes, frame});
}

Obstacle Obstacle::sphere_union(std::vector<Sphere> spheres) {
  require(!spheres.empty(), "sphere union needs at least one sphere");
  for (size_t i = 0; i < spheres.size(); ++i) {
    require(spheres[i].radius > 0, "sphere radius must be positive");
    for (size_t j = 0; j < i; ++j)
      require((spheres[i].center - spheres[j].center).norm() > spheres[i].radius + spheres[j].radius,
              "sphere-union components must have disjoint closures");
  }
  return Obstacle(SphereUnion{std::move(spheres)});
}

std::vector<Ellipsoid> Obstacle::components() const {
  std::vector<Ellipsoid> out;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          out.push_back({s.center, Vec3::Constant(s.radius), Mat3::Identity()});
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          out.push_back(s);
        } else if constexpr (std::is_same_v<T, SphereUnion>) {
          for (const auto& b : s.spheres) out.push_back({b.center, Vec3::Constant(b.radius), Mat3::Identity()});
        }
      },
      shape_);
  return out;
}

std::string Obstacle::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NoObstacle>) {
          os << "none";
        } else if constexpr (std::is_same_v<T, Sphere>) {
          os << "sphere center=" << s.center.transpose() << " radius=" << s.radius;
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          os << "ellipsoid center=" << s.center.transpose() << " semiaxes=" << s.semiaxes.transpose();
        } else {
          os << "sphere_union";
          for (const auto& b : s.spheres) os << " [" << b.center.transpose() << " r=" << b.radius << "]";
        }
      },
      shape_);
  return os.str();
}

double signed_distance(const Obstacle& obstacle, const Vec3& x) {
  double best = kInf;
  for (const auto& c : obstacle.components()) best = std::min(best, component_signed_distance(c, x));
  return best;
}

bool contains(const Obstacle& obstacle, const Vec3& x) {
  for (const auto& c : obstacle.components()) {
    const Vec3 y = c.frame.transpose() * (x - c.center);
    if (y.cwiseQuotient(c.semiaxes).squaredNorm() <= 1) return true;
  }
  return false;
}

SurfacePoint nearest_point(const Obstacle& obstacle, const Vec3& x, double tol) {
  const auto comps = obstacle.components();
  if (comps.empty()) throw Error(ErrorCode::InvalidArgument, kModule, "empty obstacle has no boundary");
  std::vector<Projection> proj;
  int best = 0;
  for (size_t i = 0; i < comps.size(); ++i) {
    proj.push_back(project_component(comps[i], x, tol));
    if (proj[i].distance < proj[best].distance) best = static_cast<int>(i);
  }
  if (proj[best].ambiguous)
    throw Error(ErrorCode::AmbiguousProjection, kModule, "several boundary points are equally near");
  const double scale = comps[best].semiaxes.maxCoeff();
  for (size_t i = 0; i < comps.size(); ++i)
    if (static_cast<int>(i) != best && proj[i].distance <= proj[best].distance + tol * scale)
      throw Error(ErrorCode::AmbiguousProjection, kModule, "two components are equally near");
  return frame_at(comps[best], proj[best].local, best);
}

SurfacePoint surface_point(const Obstacle& obstacle, const Vec3& q, int component) {
  const auto comps = obstacle.components();
  if (component < 0 || component >= static_cast<int>(comps.size()))
    throw Error(ErrorCode::InvalidArgument, kModule, "component index out of range");
  const auto& c = comps[component];
  return frame_at(c, c.frame.transpose() * (q - c.center), component);
}

Mat2 shape_operator(const Obstacle& obstacle, const SurfacePoint& q) {
  const auto comps = obstacle.components();
  const auto& c = comps.at(q.component);
  if (is_round(c)) return -Mat2::Identity() / c.semiaxes[0];
  const Vec3 local = c.frame.transpose() * (q.q - c.center);
  const Vec3 inv2 = c.semiaxes.cwiseProduct(c.semiaxes).cwiseInverse();
  const double gnorm = local.cwiseProduct(inv2).norm();
  const Mat32 Tl = c.frame.transpose() * q.tangent_frame;
  Mat2 S = -(Tl.transpose() * inv2.asDiagonal() * Tl) / gnorm;
  return 0.5 * (S + S.transpose());
}

int count_near_minimizers(const Obstacle& obstacle, const Vec3& p, double rel_tol) {
  constexpr int kSamples = 4096;
  const auto comps = obstacle.components();
  std::vector<Vec3> pts;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  double scale = 0;
  for (const auto& c : comps) {
    scale = std::max(scale, c.semiaxes.maxCoeff());
    for (int k = 0; k < kSamples; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / kSamples;
      const double r = std::sqrt(1 - z * z);
      const Vec3 u(r * std::cos(golden * k), r * std::sin(golden * k), z);
      pts.push_back(c.center + c.frame * c.semiaxes.cwiseProduct(u));
    }
  }
  double dmin = kInf;
  for (const auto& x : pts) dmin = std::min(dmin, (x - p).norm());
  const double cutoff = dmin * (1 + std::max(rel_tol, 1e-9)) + 1e-12 * scale;
  std::vector<Vec3> reps;
  const double separation = 0.05 * scale;
  for (const auto& x : pts) {
    if ((x - p).norm() > cutoff) continue;
    bool fresh = true;
    for (const auto& r : reps)
      if ((r - x).norm() < separation) {
        fresh = false;
        break;
      }
    if (fresh) reps.push_back(x);
  }
  return static_cast<int>(reps.size());
}

std::vector<SurfacePoint> first_reflector(const Obstacle& obstacle, const Vec3& p, double tol) {
  const auto comps = obstacle.components();
  if (comps.empty()) throw Error(ErrorCode::InvalidArgument, kModule, "empty obstacle has no reflector");
  for (const auto& c : comps) {
    if (is_round(c) && (p - c.center).norm() <= tol * c.semiaxes[0] &&
        count_near_minimizers(obstacle, p, tol) > kContinuumThreshold)
      throw Error(ErrorCode::ContinuumReflector, kModule, "probe center is a sphere center");
  }
  if (signed_distance(obstacle, p) <= 0)
    throw Error(ErrorCode::NotExterior, kModule, "probe center is not exterior to the obstacle");

  std::vector<double> dist(comps.size());
  std::vector<Projection> proj(comps.size());
  double dmin = kInf;
  for (size_t i = 0; i < comps.size(); ++i) {
    proj[i] = project_component(comps[i], p, 1e-12);
    dist[i] = proj[i].distance;
    dmin = std::min(dmin, dist[i]);
  }
  std::vector<SurfacePoint> out;
  for (size_t i = 0; i < comps.size(); ++i) {
    if (dist[i] > dmin * (1 + tol)) continue;
    SurfacePoint sp = frame_at(comps[i], proj[i].local, static_cast<int>(i));
    const Vec3 dir = (p - sp.q).normalized();
    if (std::abs(sp.nu.dot(dir) - 1) > 1e-10)
      throw Error(ErrorCode::AmbiguousProjection, kModule, "reflector normal does not point to the probe");
    out.push_back(sp);
  }
  return out;
}

double min_curvature_radius(const Obstacle& obstacle) {
  double r = kInf;
  for (const auto& c : obstacle.components()) {
    const double lo = c.semiaxes.minCoeff(), hi = c.semiaxes.maxCoeff();
    r = std::min(r, lo * lo / hi);
  }
  return r;
}

TubularParams tubular_params(const Obstacle& obstacle) {
  const auto comps = obstacle.components();
  double bound = min_curvature_radius(obstacle);
  for (size_t i = 0; i < comps.size(); ++i)
    for (size_t j = 0; j < i; ++j) {
      const double gap =
          (comps[i].center - comps[j].center).norm() - comps[i].semiaxes.maxCoeff() - comps[j].semiaxes.maxCoeff();
      bound = std::min(bound, 0.5 * gap);
    }
  return {0.5 * bound};
}

ReflectionMap reflection_map_unchecked(const Obstacle& obstacle, const Vec3& x) {
  const SurfacePoint sp = nearest_point(obstacle, x, 1e-12);
  ReflectionMap m;
  m.s = (x - sp.q).dot(sp.nu);
  m.d = std::abs(m.s);
  m.x_r = 2 * sp.q - x;
  m.n = sp.nu;
  m.pi = sp.nu * sp.nu.transpose();
  const Mat2 W = -sp.shape;
  const Mat2 Np = W * (Mat2::Identity() + m.s * W).inverse();
  m.n_prime = sp.tangent_frame * (0.5 * (Np + Np.transpose())) * sp.tangent_frame.transpose();
  return m;
}

ReflectionMap reflection_map(const Obstacle& obstacle, const Vec3& x) {
  const double d = std::abs(signed_distance(obstacle, x));
  if (d >= 2 * tubular_params(obstacle).delta0)
    throw Error(ErrorCode::OutsideCollar, kModule, "point lies outside the unique-projection collar");
  return reflection_map_unchecked(obstacle, x);
}

std::vector<Vec3> surface_samples(const Obstacle& obstacle, int count) {
  const auto comps = obstacle.components();
  std::vector<Vec3> out;
  if (comps.empty() || count <= 0) return out;
  double total = 0;
  for (const auto& c : comps) total += c.semiaxes.prod() / c.semiaxes.minCoeff();
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  int assigned = 0;
  for (size_t ci = 0; ci < comps.size(); ++ci) {
    const auto& c = comps[ci];
    int n = (ci + 1 == comps.size())
                ? count - assigned
                : static_cast<int>(std::lround(count * (c.semiaxes.prod() / c.semiaxes.minCoeff()) / total));
    n = std::max(n, 0);
    assigned += n;
    for (int k = 0; k < n; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / n;
      const double r = std::sqrt(1 - z * z);
      const Vec3 u(r * std::cos(golden * k), r * std::sin(golden * k), z);
      out.push_back(c.center + c.frame * c.semiaxes.cwiseProduct(u));
    }
  }
  return out;
}

}  // namespace enclosure
