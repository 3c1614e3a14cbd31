#include "enclosure/analysis.hpp"

#include "enclosure/freefield.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace enclosure {
namespace {

constexpr const char* kModule = "analysis";
constexpr double kPi = std::numbers::pi;

// Periodic trapezoid in phi, doubled until successive levels agree.
template <typename F>
double periodic_trapezoid(F&& f, double rel_tol) {
  int n = 16;
  double sum = 0;
  for (int k = 0; k < n; ++k) sum += f(2 * kPi * k / n);
  double prev = sum * 2 * kPi / n;
  while (n < 4096) {
    for (int k = 0; k < n; ++k) sum += f(2 * kPi * (k + 0.5) / n);
    n *= 2;
    const double cur = sum * 2 * kPi / n;
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur) || (cur == 0 && prev == 0)) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace

double limit_prefactor(double eta, double d, double eps, double mu) {
  return kPi / (2 * eps * eps) * (eta / d) * (eta / d) / (eps * mu);
}

OracleResult laplace_oracle(const Obstacle& obstacle, const SourceSpec& spec, double det_tol) {
  spec.check();
  const auto refl = first_reflector(obstacle, spec.p);
  OracleResult out;
  out.d_boundary = (spec.p - refl.front().q).norm();
  const Mat2 SB = observation_sphere_shape(out.d_boundary);
  double sum = 0;
  for (const auto& sp : refl) {
    ReflectorSummary r;
    r.q = sp.q;
    r.nu = sp.nu;
    r.shape = shape_operator(obstacle, sp);
    r.det = (SB - r.shape).determinant();
    if (!(r.det > det_tol)) throw Error(ErrorCode::DegenerateHessian, kModule, "det(S_B - S_D) is not positive");
    const double an = spec.a.dot(sp.nu);
    r.directional = std::clamp(1 - an * an, 0.0, 1.0);
    sum += r.directional / std::sqrt(r.det);
    out.reflectors.push_back(r);
  }
  out.prefactor = limit_prefactor(spec.eta, out.d_boundary, spec.eps, spec.mu);
  out.value = out.prefactor * sum;
  return out;
}

double peaked_surface_integral(const Obstacle& obstacle, const Vec3& p, double kappa,
                               const std::function<double(const Vec3&, const Vec3&)>& g, double rel_tol) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0, total_err = 0;
  for (const auto& c : obstacle.components()) {
    const Vec3& e = c.semiaxes;
    // Pole of the parameterization: the component point nearest to p, on the unit sphere.
    const Obstacle single = Obstacle::ellipsoid(c.center, c.semiaxes, c.frame);
    const Vec3 y0 = c.frame.transpose() * (nearest_point(single, p).q - c.center);
    const Vec3 u0 = y0.cwiseQuotient(e).normalized();
    int axis;
    u0.cwiseAbs().minCoeff(&axis);
    const Vec3 e1 = (Vec3::Unit(axis) - u0[axis] * u0).normalized();
    const Vec3 e2 = u0.cross(e1);
    const Vec3 inv2 = e.cwiseProduct(e).cwiseInverse();

    auto inner = [&](double theta) {
      const double ct = std::cos(theta), st = std::sin(theta);
      auto at_phi = [&](double ph) {
        const Vec3 w = std::cos(ph) * e1 + std::sin(ph) * e2;
        const Vec3 wp = -std::sin(ph) * e1 + std::cos(ph) * e2;
        const Vec3 y = e.cwiseProduct(ct * u0 + st * w);
        const Vec3 dth = e.cwiseProduct(-st * u0 + ct * w);
        const Vec3 dph = e.cwiseProduct(st * wp);
        const double dS = dth.cross(dph).norm();
        if (dS == 0) return 0.0;
        const Vec3 x = c.center + c.frame * y;
        const Vec3 nu = c.frame * y.cwiseProduct(inv2).normalized();
        return g(x, nu) * dS;
      };
      return periodic_trapezoid(at_phi, 0.1 * rel_tol);
    };

    const double width = std::min(kPi / 8, 1.0 / std::sqrt(std::max(1.0, 2 * kappa * e.maxCoeff())));
    std::vector<double> breaks{0.0};
    for (double t = width; t < kPi; t *= 2) breaks.push_back(t);
    breaks.push_back(kPi);
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
      double err = 0;
      total += gauss_kronrod<double, 31>::integrate(inner, breaks[b], breaks[b + 1], 12, 0.1 * rel_tol, &err);
      total_err += err;
    }
  }
  if (!(total_err <= rel_tol * std::abs(total) + 1e-300) && total != 0)
    throw Error(ErrorCode::QuadratureNotConverged, kModule, "surface quadrature did not reach the tolerance");
  return total;
}

SurfaceIntegral surface_laplace_integral(const Obstacle& obstacle, const Vec3& p, double tau_tilde,
                                         SurfaceWeight weight, const Vec3& a, double rel_tol) {
  const double d = signed_distance(obstacle, p);
  if (!(d > 0)) throw Error(ErrorCode::NotExterior, kModule, "p must be exterior");
  auto g = [&](const Vec3& x, const Vec3& nu) {
    const Vec3 r = x - p;
    const double rn = r.norm();
    double w = 1;
    if (weight == SurfaceWeight::MForm) {
      const Vec3 om = r / rn;
      const double oa = om.dot(a);
      w = om.dot(nu) * (oa * oa - a.squaredNorm());
    }
    return std::exp(-2 * tau_tilde * (rn - d)) / (rn * rn) * w;
  };
  return {peaked_surface_integral(obstacle, p, tau_tilde, g, rel_tol), d};
}

SignedLog<> J_energy(const Obstacle& obstacle, const SourceSpec& spec, double tau, EnergyForm form, double rel_tol) {
  spec.check();
  const double d = signed_distance(obstacle, spec.p);
  if (!(d > spec.eta)) throw Error(ErrorCode::Overlap, kModule, "probe ball meets the obstacle");
  const auto pf = ProbeField<double>::make(spec, tau);
  const double k = pf.tau_tilde;
  auto g = [&](const Vec3& x, const Vec3& nu) {
    const auto V = V_field_scaled<double>(x, pf);
    const auto C = curl_V_scaled<double>(x, pf);
    const double r = (x - spec.p).norm();
    const double decay = std::exp(-2 * k * (r - d));
    if (form == EnergyForm::Poynting) return -nu.dot(C.mantissa.cross(V.mantissa)) * decay;
    return nu.cross(V.mantissa).dot(C.mantissa) * decay;
  };
  const double s = peaked_surface_integral(obstacle, spec.p, k, g, rel_tol) / (spec.eps * spec.mu);
  SignedLog<> J = SignedLog<>::from_value(s);
  if (J.sign != 0) J.log_abs += 2 * pf.log_amplitude() - 2 * k * d;
  return J;
}

SignedLog<> normalized_indicator_prediction(const Obstacle& obstacle, const SourceSpec& spec, double tau) {
  const auto dg = validate_source(spec, obstacle);
  if (dg.continuum_reflector) throw Error(ErrorCode::HypothesisViolated, kModule, "first reflector is not finite");
  if (!dg.window_ok) throw Error(ErrorCode::HypothesisViolated, kModule, "T <= 2 sqrt(eps mu) dist(D, B)");
  OracleResult oracle;
  try {
    oracle = laplace_oracle(obstacle, spec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateHessian)
      throw Error(ErrorCode::HypothesisViolated, kModule, "non-degeneracy fails at a reflector");
    throw;
  }
  bool directive = false;
  for (const auto& r : oracle.reflectors) directive = directive || r.directional > 1e-12;
  if (!directive) throw Error(ErrorCode::HypothesisViolated, kModule, "a is parallel to every reflector normal");
  SignedLog<> J = J_energy(obstacle, spec, tau);
  if (J.sign != 0) J.log_abs += std::log(2.0);
  return J;
}

IndicatorSeries semianalytic_series(const Obstacle& obstacle, const SourceSpec& spec, const std::vector<double>& taus) {
  IndicatorSeries s;
  s.origin = "semianalytic";
  normalized_indicator_prediction(obstacle, spec, taus.front());
  s.points.resize(taus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < taus.size(); ++i) {
    SignedLog<> J = J_energy(obstacle, spec, taus[i]);
    if (J.sign != 0) J.log_abs += std::log(2.0);
    s.points[i].tau = taus[i];
    s.points[i].I = J;
  }
  s.check();
  return s;
}

RecoveryResult recover_curvatures(const double R[2], const double s[2], double d_p, const double eta[2],
                                  double a_dot_nu, double eps, double mu) {
  if (s[0] == s[1]) throw Error(ErrorCode::SingularSystem, kModule, "the two offsets coincide");
  if (!(0 < s[0] && s[0] < d_p && 0 < s[1] && s[1] < d_p))
    throw Error(ErrorCode::InvalidArgument, kModule, "offsets must lie in (0, d_p)");
  if (!(std::abs(a_dot_nu) < 1)) throw Error(ErrorCode::InvalidArgument, kModule, "need |a . nu| < 1");
  RecoveryResult out;
  for (int j = 0; j < 2; ++j) {
    if (!(R[j] > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "second-order limits must be positive");
    out.R[j] = R[j];
    out.lambda[j] = 1.0 / (d_p - s[j]);
    const double c = limit_prefactor(eta[j], d_p - s[j], eps, mu);
    const double q = (1 - a_dot_nu * a_dot_nu) / R[j];
    out.X[j] = q * q * c * c;
  }
  const double l1 = out.lambda[0], l2 = out.lambda[1];
  if (std::abs(l1 - l2) <= 1e-14 * std::max(l1, l2))
    throw Error(ErrorCode::SingularSystem, kModule, "lambda_1 = lambda_2");
  const double b1 = out.X[0] - l1 * l1, b2 = out.X[1] - l2 * l2;
  out.Y1 = (b1 - b2) / (-2 * (l1 - l2));
  out.Y2 = b1 + 2 * l1 * out.Y1;
  out.H = out.Y1;
  out.K = out.Y2;
  // Umbilic points sit exactly on H^2 = K, so only a clear violation counts.
  out.negative_discriminant = out.H * out.H < out.K * (1 - 1e-3);
  for (int j = 0; j < 2; ++j) {
    const double l = out.lambda[j];
    out.residual = std::max(out.residual, std::abs(l * l - 2 * l * out.H + out.K - out.X[j]));
  }
  return out;
}

bool probe_direction(const DistanceProbe& dist_at, const Vec3& p, const Vec3& omega, double s, double tol) {
  if (!(s > 0 && s < 1)) throw Error(ErrorCode::InvalidArgument, kModule, "s must lie in (0, 1)");
  const double d = dist_at(p);
  const double dev = (dist_at(p + s * d * omega.normalized()) - (1 - s) * d) / d;
  return std::abs(dev) <= tol;
}

std::vector<ProbeOutcome> probe_sweep(const DistanceProbe& dist_at, const Vec3& p, const std::vector<Vec3>& directions,
                                      double s, double tol) {
  if (!(s > 0 && s < 1)) throw Error(ErrorCode::InvalidArgument, kModule, "s must lie in (0, 1)");
  const double d = dist_at(p);
  std::vector<ProbeOutcome> out;
  for (const auto& w : directions) {
    ProbeOutcome o;
    o.omega = w.normalized();
    o.deviation = (dist_at(p + s * d * o.omega) - (1 - s) * d) / d;
    o.on_reflector = std::abs(o.deviation) <= tol;
    out.push_back(o);
  }
  return out;
}

std::vector<Vec3> icosahedral_directions(int level, const Vec3& align) {
  const double t = (1 + std::sqrt(5.0)) / 2;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& f : faces) {
      const int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }
  const Eigen::Quaterniond rot = Eigen::Quaterniond::FromTwoVectors(v[0], align.normalized());
  for (auto& x : v) x = (rot * x).normalized();
  v[0] = align.normalized();
  return v;
}

}  // namespace enclosure
