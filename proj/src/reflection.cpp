#include "enclosure/reflection.hpp"

#include "enclosure/freefield.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace enclosure {
namespace {

constexpr const char* kModule = "reflection";

// Orthonormal frame with columns (t1, t2, nu).
Mat3 local_frame(const SurfacePoint& sp) {
  Mat3 R;
  R.col(0) = sp.tangent_frame.col(0);
  R.col(1) = sp.tangent_frame.col(1);
  R.col(2) = sp.nu;
  return R;
}

Vec3 curl_of(const Mat3& J) {
  return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
}

// Jacobian by differences in the frame R. Tangential directions are central; the normal
// direction is one-sided second order towards `side` (+1 outward, -1 inward).
template <typename F>
Mat3 frame_jacobian(F&& f, const Vec3& x, const Mat3& R, double h, int side) {
  Mat3 D;
  for (int a = 0; a < 2; ++a) D.col(a) = (f(x + h * R.col(a)) - f(x - h * R.col(a))) / (2 * h);
  const Vec3 n = side * R.col(2);
  D.col(2) = side * (-3 * f(x) + 4 * f(x + h * n) - f(x + 2 * h * n)) / (2 * h);
  return D * R.transpose();
}

void check_step(const ReflectedField& field, double h_fd) {
  if (!(h_fd > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "h_fd must be positive");
  if (h_fd > field.collar.delta0 / 4)
    throw Error(ErrorCode::StepTooLarge, kModule, "h_fd exceeds a quarter of the collar width");
}

// (1/(mu eps)) curl curl V* + tau^2 V* from second differences in the frame R with step h.
Vec3 operator_residual(const ReflectedField& field, const Vec3& x, const Mat3& R, double h, bool one_sided) {
  auto f = [&](double a, double b, double c) -> Vec3 { return reflect(field, Vec3(x + h * (a * R.col(0) + b * R.col(1) + c * R.col(2)))); };

  // G[a][b] = d_a d_b V* in frame coordinates.
  Vec3 G[3][3];
  const Vec3 f0 = f(0, 0, 0);
  auto unit = [](int a, double s) {
    Vec3 e = Vec3::Zero();
    e[a] = s;
    return e;
  };
  auto fv = [&](const Vec3& o) -> Vec3 { return f(o[0], o[1], o[2]); };
  for (int a = 0; a < 2; ++a) G[a][a] = (fv(unit(a, 1)) - 2 * f0 + fv(unit(a, -1))) / (h * h);
  G[0][1] = G[1][0] = (f(1, 1, 0) - f(1, -1, 0) - f(-1, 1, 0) + f(-1, -1, 0)) / (4 * h * h);
  if (one_sided) {
    G[2][2] = (2 * f0 - 5 * f(0, 0, 1) + 4 * f(0, 0, 2) - f(0, 0, 3)) / (h * h);
    auto normal_derivative = [&](const Vec3& o) -> Vec3 {
      return (-3 * fv(o) + 4 * fv(o + unit(2, 1)) - fv(o + unit(2, 2))) / (2 * h);
    };
    for (int a = 0; a < 2; ++a)
      G[a][2] = G[2][a] = (normal_derivative(unit(a, 1)) - normal_derivative(unit(a, -1))) / (2 * h);
  } else {
    G[2][2] = (f(0, 0, 1) - 2 * f0 + f(0, 0, -1)) / (h * h);
    for (int a = 0; a < 2; ++a)
      G[a][2] = G[2][a] =
          (fv(unit(a, 1) + unit(2, 1)) - fv(unit(a, 1) + unit(2, -1)) - fv(unit(a, -1) + unit(2, 1)) +
           fv(unit(a, -1) + unit(2, -1))) /
          (4 * h * h);
  }
  // World-frame second derivatives: d_i d_j V = sum_ab R_ia R_jb G_ab.
  Vec3 laplacian = Vec3::Zero();
  for (int a = 0; a < 3; ++a) laplacian += G[a][a];
  Vec3 grad_div = Vec3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += R(i, a) * R(j, b) * G[a][b][j];
      grad_div[i] += s;
    }
  const auto& base = field.base;
  return (grad_div - laplacian) / (base.mu * base.eps) + base.tau * base.tau * f0;
}

}  // namespace

BaseField probe_base_field(const Obstacle& obstacle, const SourceSpec& spec, double tau) {
  spec.check();
  const auto pf = ProbeField<double>::make(spec, tau);
  const double d = signed_distance(obstacle, spec.p);
  if (!(d > spec.eta)) throw Error(ErrorCode::Overlap, kModule, "probe ball meets the obstacle");
  BaseField b;
  b.log_scale = pf.log_scale_at(d);
  b.tau = tau;
  b.eps = spec.eps;
  b.mu = spec.mu;
  const double ref = b.log_scale;
  b.value = [pf, ref](const Vec3& x) { return V_field_scaled<double>(x, pf).relative_to(ref); };
  b.jacobian = [pf, ref](const Vec3& x) { return V_jacobian_scaled<double>(x, pf).relative_to(ref); };
  return b;
}

ReflectedField make_reflected_field(const Obstacle& obstacle, BaseField base) {
  if (obstacle.empty()) throw Error(ErrorCode::InvalidArgument, kModule, "reflection needs an obstacle");
  return {std::move(base), obstacle, tubular_params(obstacle)};
}

ReflectedField make_reflected_field(const Obstacle& obstacle, const SourceSpec& spec, double tau) {
  return make_reflected_field(obstacle, probe_base_field(obstacle, spec, tau));
}

Vec3 reflect(const ReflectedField& field, const ReflectionMap& m) {
  const Vec3 V = field.base.value(m.x_r);
  const Vec3 B = m.pi * V;
  const Vec3 A = V - B;
  return -A + B + 2 * m.d * (m.n_prime * A);
}

Vec3 reflect(const ReflectedField& field, const Vec3& x) {
  const ReflectionMap m = reflection_map(field.obstacle, x);
  if (m.s < -1e-12) throw Error(ErrorCode::NotExterior, kModule, "reflection is defined outside the obstacle");
  return reflect(field, m);
}

TraceReport check_tangential_trace(const ReflectedField& field, const std::vector<Vec3>& samples, double q_offset) {
  TraceReport out;
  for (const auto& x : samples) {
    const SurfacePoint sp = nearest_point(field.obstacle, x, 1e-13);
    ReflectionMap m = reflection_map(field.obstacle, sp.q);
    m.x_r += 2 * q_offset * sp.tangent_frame.col(0);
    const Vec3 V = field.base.value(sp.q);
    const double dev = (reflect(field, m).cross(sp.nu) + V.cross(sp.nu)).norm();
    out.points.push_back(sp.q);
    out.deviation.push_back(dev);
    out.max_deviation = std::max(out.max_deviation, dev);
    out.scale = std::max(out.scale, V.norm());
  }
  return out;
}

double default_fd_step(const Obstacle& obstacle) {
  double diameter = 0;
  for (const auto& c : obstacle.components()) diameter = std::max(diameter, 2 * c.semiaxes.maxCoeff());
  return std::min(tubular_params(obstacle).delta0 / 8, 1e-3 * diameter);
}

CurlTraceReport check_curl_trace(const ReflectedField& field, const std::vector<Vec3>& samples, double h_fd) {
  check_step(field, h_fd);
  CurlTraceReport out;
  out.h_fd = h_fd;
  auto vstar = [&](const Vec3& y) { return reflect(field, y); };
  double max_dev = 0, max_dev_half = 0;
  for (const auto& x : samples) {
    const SurfacePoint sp = nearest_point(field.obstacle, x, 1e-13);
    const Mat3 R = local_frame(sp);
    double dev[2];
    for (int level = 0; level < 2; ++level) {
      const double h = level == 0 ? h_fd : h_fd / 2;
      const Vec3 c_star = curl_of(frame_jacobian(vstar, sp.q, R, h, +1));
      const Vec3 c_base = curl_of(frame_jacobian(field.base.value, sp.q, R, h, -1));
      dev[level] = sp.nu.cross(c_star - c_base).norm();
    }
    out.scale = std::max(out.scale, sp.nu.cross(curl_of(field.base.jacobian(sp.q))).norm());
    out.points.push_back(sp.q);
    out.deviation.push_back(dev[0]);
    out.deviation_half.push_back(dev[1]);
    max_dev = std::max(max_dev, dev[0]);
    max_dev_half = std::max(max_dev_half, dev[1]);
  }
  if (out.scale > 0) {
    out.relative = max_dev / out.scale;
    out.relative_half = max_dev_half / out.scale;
  }
  out.order = max_dev_half > 0 ? std::log2(max_dev / max_dev_half) : 0;
  return out;
}

ResidualReport residual_structure(const ReflectedField& field, const Vec3& x, double h_fd) {
  check_step(field, h_fd);
  const ReflectionMap m = reflection_map(field.obstacle, x);
  if (m.s < -1e-12) throw Error(ErrorCode::NotExterior, kModule, "residual is evaluated outside the obstacle");
  const SurfacePoint sp = nearest_point(field.obstacle, x, 1e-13);
  const Mat3 R = local_frame(sp);
  const double h = h_fd;
  const bool one_sided = m.d < 2.5 * h;
  // Both stencils are second order, so one Richardson step removes the h^2 error.
  const Vec3 coarse = operator_residual(field, x, R, h, one_sided);
  const Vec3 fine = operator_residual(field, x, R, h / 2, one_sided);
  const Vec3 residual = (4 * fine - coarse) / 3;
  const auto& base = field.base;

  ResidualReport out;
  out.x = x;
  out.d = m.d;
  out.h_fd = h;
  out.residual = residual.norm();
  out.first_order = base.value(m.x_r).norm() + base.jacobian(m.x_r).norm();
  double hess2 = 0;
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = Vec3::Unit(j);
    hess2 += ((base.jacobian(m.x_r + h * e) - base.jacobian(m.x_r - h * e)) / (2 * h)).squaredNorm();
  }
  out.second_order = m.d * std::sqrt(hess2);
  return out;
}

ResidualFit fit_residual_bound(const std::vector<ResidualReport>& reports) {
  ResidualFit fit;
  for (const auto& r : reports)
    if (r.d <= 1e-9 || r.second_order == 0) {
      fit.C1 = std::max(fit.C1, r.residual / r.first_order);
      ++fit.boundary_points;
    }
  for (const auto& r : reports)
    if (!(r.d <= 1e-9 || r.second_order == 0)) {
      fit.C2 = std::max(fit.C2, (r.residual - fit.C1 * r.first_order) / r.second_order);
      ++fit.interior_points;
    }
  return fit;
}

void write_reflection_csv(const std::string& path, const std::vector<ReflectionRow>& rows) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, kModule, "cannot open " + path);
  os << std::setprecision(17);
  os << "x,y,z,identity,deviation,fd_order\n";
  for (const auto& r : rows)
    os << r.point.x() << ',' << r.point.y() << ',' << r.point.z() << ',' << r.identity << ',' << r.deviation << ','
       << r.order << '\n';
}

}  // namespace enclosure
