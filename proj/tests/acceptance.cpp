// Acceptance run: one PASS/FAIL line per criterion, followed by the numbers behind it.
// Exit status is the number of failed criteria (0 when all pass). Criterion numbers given as
// arguments restrict the run to those.

#include "oracles.hpp"

#include "enclosure/analysis.hpp"
#include "enclosure/config.hpp"
#include "enclosure/experiment.hpp"
#include "enclosure/fdtd.hpp"
#include "enclosure/freefield.hpp"
#include "enclosure/geometry.hpp"
#include "enclosure/indicator.hpp"
#include "enclosure/reflection.hpp"
#include "enclosure/source.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace enclosure;
using enclosure::test::ball_kernel_quadrature;
using enclosure::test::maxwell_residual;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

Obstacle unit_sphere() { return Obstacle::sphere(Vec3::Zero(), 1.0); }

SourceSpec testbed_source() {
  SourceSpec s;
  s.p = Vec3(3, 0, 0);
  s.eta = 0.25;
  s.a = Vec3::UnitZ();
  s.T = 4.0;
  return s;
}

ExperimentConfig profile(const std::string& name) { return load_config(std::string(ACCEPTANCE_CONFIG_DIR) + "/" + name); }

// Mean-value identity against a tensor Gauss rule over the ball.
Outcome mean_value_identity() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const double eta = 0.1 + 0.4 * U(rng), tt = 0.5 + 9.5 * U(rng);
    const Vec3 p(U(rng), U(rng), U(rng));
    const Vec3 x = p + eta * (2 + 3 * U(rng)) * random_unit(rng);
    const double closed = mean_value_kernel<double>(x, p, eta, tt);
    const double quad = ball_kernel_quadrature(x, p, eta, tt, 64);
    worst = std::max(worst, std::abs(closed - quad) / std::abs(quad));
  }
  return {worst <= 1e-6, fmt("max relative deviation %.2e over 50 points (tol 1e-6)", worst)};
}

// Free-field residual order under h -> h/2.
Outcome free_field_order() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0, 1);
  double lo = 1e9, hi = -1e9;
  for (int k = 0; k < 20; ++k) {
    SourceSpec s;
    s.p = Vec3::Zero();
    s.eta = 0.25;
    s.a = random_unit(rng);
    s.eps = 1.0 + 0.5 * U(rng);
    s.mu = 1.0 + 0.5 * U(rng);
    const auto pf = ProbeField<double>::make(s, 1.0 + 4.0 * U(rng));
    const Vec3 x = (0.6 + 1.4 * U(rng)) * random_unit(rng);
    auto V = [&](const Vec3& y) -> Vec3 { return V_field(y, pf); };
    const double r1 = maxwell_residual(V, x, 0.02, s.eps * s.mu, pf.tau).norm();
    const double r2 = maxwell_residual(V, x, 0.01, s.eps * s.mu, pf.tau).norm();
    const double order = std::log2(r1 / r2);
    lo = std::min(lo, order);
    hi = std::max(hi, order);
  }
  return {lo >= 1.7 && hi <= 2.3, fmt("observed order in [%.3f, %.3f] over 20 points (need 2.0 +- 0.3)", lo, hi)};
}

// Exact sphere integral: (2 pi R / D) (E1(2k(D - R)) - E1(2k(D + R))), D = |p - center|.
double sphere_integral_scaled(double R, double D, double k) {
  const double d = D - R;
  // std::expint keeps only the leading asymptotic term for large arguments.
  auto E1 = [](double x) { return boost::math::expint(1, x); };
  return 2 * kPi * R / D * std::exp(2 * k * d) * (E1(2 * k * d) - E1(2 * k * (D + R)));
}

// Laplace-method limit of the boundary integral on the sphere testbed.
Outcome laplace_method_limit() {
  const Obstacle D = unit_sphere();
  const Vec3 p(3, 0, 0);
  const double d = 2.0;
  const double det = (1 / d + 1) * (1 / d + 1);  // det(I/d + I/R), R = 1
  const double limit = kPi / (d * d) / std::sqrt(det);
  std::ostringstream os;
  double prev = 1e9, err80 = 1, exact_dev = 0;
  bool decreasing = true;
  for (double tt : {10.0, 20.0, 40.0, 80.0}) {
    const SurfaceIntegral s = surface_laplace_integral(D, p, tt, SurfaceWeight::Unit);
    exact_dev = std::max(exact_dev, std::abs(s.scaled / sphere_integral_scaled(1, 3, tt) - 1));
    const double err = std::abs(tt * s.scaled / limit - 1);
    decreasing = decreasing && err < prev;
    prev = err;
    if (tt == 80.0) err80 = err;
    os << fmt(" %g:%.4f", tt, err);
  }
  const bool pass = err80 <= 0.02 && decreasing && exact_dev <= 1e-6;
  return {pass, fmt("relative error by tau~ {%s }, quadrature vs exact sphere integral %.1e", os.str().c_str(),
                    exact_dev)};
}

// Semianalytic second-order limit against the oracle, and the factor 2 between the two limits.
Outcome semianalytic_consistency() {
  const Obstacle D = unit_sphere();
  const SourceSpec s = testbed_source();
  const OracleResult o = laplace_oracle(D, s);
  const double dist = 1.75;
  const IndicatorSeries series = semianalytic_series(D, s, tau_grid(20 / dist, 320 / dist, 16));
  const double L = second_order_limit(series, s, dist).value;
  const double ratio = L / o.value;

  // Energy limit from the boundary geometry alone: (pi / 4)(eta / d)^2 (1 - (a.nu)^2) / sqrt(det).
  auto energy_rhs = [](double eta, double d, double a_nu, double det) {
    return kPi / 4 * (eta / d) * (eta / d) * (1 - a_nu * a_nu) / std::sqrt(det);
  };
  double worst = std::abs(o.value / (2 * energy_rhs(0.25, 2.0, 0.0, 2.25)) - 1);
  SourceSpec t = testbed_source();
  t.p = Vec3(4, 0, 0);
  t.a = Vec3(0.6, 0, 0.8);
  const Obstacle ell = Obstacle::ellipsoid(Vec3::Zero(), Vec3(2, 1, 1));
  // Tip of the (2, 1, 1) ellipsoid: both principal curvatures 2, observation sphere 1/2.
  worst = std::max(worst, std::abs(laplace_oracle(ell, t).value / (2 * energy_rhs(0.25, 2.0, 0.6, 6.25)) - 1));
  return {std::abs(ratio - 1) <= 0.03 && worst <= 1e-12,
          fmt("extrapolated ratio %.5f (tol 3%%); oracle / (2 x energy limit) - 1 = %.1e", ratio, worst)};
}

struct DeskRun {
  IndicatorSeries series;
  WindowReport window;
  DistanceEstimate est;
  double h = 0;
  double seconds = 0;
};

DeskRun desk_run(ExperimentConfig c, double h) {
  const auto t0 = std::chrono::steady_clock::now();
  c.grid.h = h;
  const FieldRecord rec = run(c.obstacle, c.source, resolved_grid(c));
  DeskRun out;
  out.h = h;
  out.series = fdtd_indicator(rec, c, &out.window);
  out.est = extract_distance(out.series, c.source, c.distance);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// Distance from the FDTD indicator.
Outcome fdtd_distance() {
  const double truth = 1.75;
  const ExperimentConfig demo = profile("sphere_demo.ini");
  const DeskRun a = desk_run(demo, demo.grid.h);
  bool positive = !a.series.points.empty();
  for (const auto& p : a.series.points) positive = positive && p.I.sign > 0;
  const double err = std::abs(a.est.dist / truth - 1);
  const DeskRun b = desk_run(demo, demo.grid.h / 2);
  const bool toward = std::abs(b.est.dist - truth) < std::abs(a.est.dist - truth);

  const ExperimentConfig smoke = profile("sphere_smoke.ini");
  const DeskRun s = desk_run(smoke, smoke.grid.h);
  const double smoke_err = std::abs(s.est.dist / truth - 1);

  const bool pass = positive && err <= 0.05 && toward && smoke_err <= 0.10 && s.seconds < 300;
  return {pass, fmt("h=%g: positive on [%.3g, %.3g] %s, dist %.4f (%.2f%%, tol 5%%); h=%g: dist %.4f (%s); "
                    "smoke h=%g: dist %.4f (%.2f%%, tol 10%%) in %.1f s",
                    a.h, a.window.window.lo, a.window.window.hi, positive ? "yes" : "no", a.est.dist, 100 * err, b.h,
                    b.est.dist, toward ? "closer" : "not closer", s.h, s.est.dist, 100 * smoke_err, s.seconds)};
}

// Second-order limit from the FDTD indicator, and its dependence on the polarization.
Outcome fdtd_limit() {
  ExperimentConfig c = profile("sphere_smoke.ini");
  const double oracle = laplace_oracle(c.obstacle, c.source).value;
  const DeskRun r = desk_run(c, c.grid.h);
  const double L = second_order_limit(r.series, c.source, r.est.dist, c.limit).value;
  const double L_geo = second_order_limit(r.series, c.source, 1.75, c.limit).value;
  const double rel = std::abs(L / oracle - 1);

  // a from perpendicular to parallel to nu_q = e_x, on the window of the perpendicular run.
  const auto taus = r.series.taus();
  std::vector<double> limits;
  std::ostringstream os;
  bool monotone = true;
  for (double theta : {0.0, kPi / 4, kPi / 2}) {
    SourceSpec s = c.source;
    s.a = Vec3(std::sin(theta), 0, std::cos(theta));
    double v = std::nan("");
    try {
      const FieldRecord rec = run(c.obstacle, s, resolved_grid(c));
      v = second_order_limit(indicator_series(rec, s, taus, c.indicator), s, 1.75, c.limit).value;
    } catch (const Error& e) {
      os << " [" << e.what() << "]";
    }
    if (!limits.empty()) monotone = monotone && std::abs(v) < std::abs(limits.back());
    limits.push_back(v);
    os << fmt(" %.0fdeg:%.3e", theta * 180 / kPi, v);
  }
  monotone = monotone && std::all_of(limits.begin(), limits.end(), [](double v) { return std::isfinite(v); });

  // Diagnostic only: at tau = 4 the grid resolves the field, so the gap to the semianalytic
  // indicator there is what the recording window cuts from an echo that starts at t = 3.5.
  std::ostringstream cut;
  for (double T : {c.source.T, c.source.T + 2}) {
    ExperimentConfig longer = c;
    longer.source.T = T;
    const SourceSpec& s = longer.source;
    const std::vector<double> t4{4.0};
    const FieldRecord rec = run(c.obstacle, s, resolved_grid(longer));
    const double f = normalized_sequence(indicator_series(rec, s, t4, c.indicator), s, 1.75)[0];
    const double g = normalized_sequence(semianalytic_series(c.obstacle, s, t4), s, 1.75)[0];
    cut << fmt(" T=%g:%.3f", T, f / g);
  }
  return {rel <= 0.15 && monotone,
          fmt("limit %.4e with estimated dist %.4f, %.4e with dist 1.75; oracle %.4e (off by %.0f%%, tol 15%%); "
              "polarization sweep{%s } %s; fdtd/semianalytic at tau=4{%s }",
              L, r.est.dist, L_geo, oracle, 100 * rel, os.str().c_str(), monotone ? "monotone" : "not monotone",
              cut.str().c_str())};
}

RecoveryResult round_trip(const Obstacle& D, const Vec3& p, const Vec3& a) {
  SourceSpec base = testbed_source();
  base.p = p;
  base.a = a;
  const auto refl = first_reflector(D, p);
  const Vec3 dir = (refl[0].q - p).normalized();
  const double d_p = (refl[0].q - p).norm();
  const double s[2] = {0.5, 1.0}, eta[2] = {0.25, 0.25};
  double R[2];
  for (int j = 0; j < 2; ++j) {
    SourceSpec sj = base;
    sj.p = p + s[j] * dir;
    sj.eta = eta[j];
    R[j] = laplace_oracle(D, sj).value;
  }
  return recover_curvatures(R, s, d_p, eta, a.dot(refl[0].nu), base.eps, base.mu);
}

// Curvatures from two exact limits.
Outcome curvature_round_trip() {
  const RecoveryResult sph = round_trip(unit_sphere(), Vec3(3, 0, 0), Vec3::UnitZ());
  const RecoveryResult ell = round_trip(Obstacle::ellipsoid(Vec3::Zero(), Vec3(2, 1, 1)), Vec3(4, 0, 0), Vec3::UnitZ());
  const double e1 = std::max(std::abs(sph.K - 1), std::abs(sph.H + 1));
  const double e2 = std::max(std::abs(ell.K / 4 - 1), std::abs(ell.H / -2 - 1));
  return {e1 <= 1e-6 && e2 <= 1e-6,
          fmt("sphere K=%.9f H=%.9f (truth 1, -1); ellipsoid tip K=%.9f H=%.9f (truth 4, -2)", sph.K, sph.H, ell.K,
              ell.H)};
}

// Reflector directions from a probe sweep with exact distances.
Outcome probe_sweep_directions() {
  auto sweep = [](const Obstacle& D, const Vec3& p, int& n_dirs) {
    std::vector<Vec3> truth;
    for (const auto& q : first_reflector(D, p)) truth.push_back((q.q - p).normalized());
    const auto dirs = icosahedral_directions(2, truth.front());
    n_dirs = static_cast<int>(dirs.size());
    const DistanceProbe dist = [&](const Vec3& x) { return signed_distance(D, x); };
    int found = 0, wrong = 0;
    for (const auto& o : probe_sweep(dist, p, dirs, 0.5)) {
      if (!o.on_reflector) continue;
      const bool hit = std::any_of(truth.begin(), truth.end(), [&](const Vec3& w) { return (o.omega - w).norm() < 1e-9; });
      hit ? ++found : ++wrong;
    }
    return std::make_tuple(found, wrong, static_cast<int>(truth.size()));
  };
  int n1 = 0, n2 = 0;
  const auto [f1, w1, t1] = sweep(unit_sphere(), Vec3(3, 0, 0), n1);
  const Obstacle two = Obstacle::sphere_union({{Vec3(3, 0, 0), 1.0}, {Vec3(-3, 0, 0), 1.0}});
  const auto [f2, w2, t2] = sweep(two, Vec3::Zero(), n2);
  const bool pass = n1 >= 162 && n2 >= 162 && f1 == t1 && w1 == 0 && f2 == t2 && w2 == 0;
  return {pass, fmt("one sphere: %d of %d reflectors, %d false (%d directions); two spheres: %d of %d, %d false "
                    "(%d directions)",
                    f1, t1, w1, n1, f2, t2, w2, n2)};
}

// Reflected field: boundary traces and the residual envelope.
Outcome reflection_principle() {
  const Obstacle D = unit_sphere();
  const SourceSpec s = testbed_source();
  const auto samples = surface_samples(D, 500);
  const auto base = surface_samples(D, 40);
  const double h_fd = default_fd_step(D);
  double trace = 0, curl = 0, order = 1e9, c1 = 0;
  std::vector<double> c2;
  std::ostringstream os;
  for (double tau : {10.0, 20.0, 40.0}) {
    const ReflectedField f = make_reflected_field(D, s, tau);
    trace = std::max(trace, check_tangential_trace(f, samples).relative());
    const CurlTraceReport cr = check_curl_trace(f, samples, h_fd);
    curl = std::max(curl, cr.relative);
    order = std::min(order, cr.order);
    std::vector<ResidualReport> res;
    for (const auto& x : base) {
      const SurfacePoint sp = nearest_point(D, x);
      for (double off : {0.0, 0.05, 0.1, 0.2}) res.push_back(residual_structure(f, sp.q + off * sp.nu, h_fd / 4));
    }
    const ResidualFit fit = fit_residual_bound(res);
    c1 = std::max(c1, fit.C1);
    c2.push_back(fit.C2);
    os << fmt(" %g:%.3f", tau, fit.C2);
  }
  const auto [lo, hi] = std::minmax_element(c2.begin(), c2.end());
  const double spread = *hi / *lo - 1;
  // C1 multiplies terms that cancel exactly at the boundary, so it only measures difference noise.
  const bool pass = trace <= 1e-12 && curl <= 5e-3 && order >= 0.8 && c1 <= 1e-3 && spread <= 0.2;
  return {pass, fmt("trace %.1e (tol 1e-12); curl %.2e (tol 5e-3), order >= %.2f; C1 <= %.1e, C2 by tau{%s } "
                    "spread %.1f%% (tol 20%%)",
                    trace, curl, order, c1, os.str().c_str(), 100 * spread)};
}

// Large-tau law of the ramped sine transform.
Outcome pulse_law() {
  RampedSine params;
  params.omega = 1.0;
  const Pulse pulse = Pulse::ramped_sine(params);
  const double tau = 200.0;
  const double v = tau * tau * tau * laplace_pulse(pulse, tau);
  const double target = 2 * params.omega;
  const double err = std::abs(v / target - 1);
  return {err <= 0.02, fmt("tau^3 f~(tau) = %.6f at tau = 200, 2 omega = %.6f (%.3f%%, tol 2%%)", v, target, 100 * err)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"mean-value identity", mean_value_identity},
      {"free-field residual order", free_field_order},
      {"Laplace-method boundary limit", laplace_method_limit},
      {"semianalytic limit vs oracle", semianalytic_consistency},
      {"FDTD distance", fdtd_distance},
      {"FDTD second-order limit", fdtd_limit},
      {"curvature round trip", curvature_round_trip},
      {"probe sweep", probe_sweep_directions},
      {"reflection principle", reflection_principle},
      {"pulse law", pulse_law},
  };
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n >= 1 && n <= static_cast<int>(criteria.size())) selected[n - 1] = true;
  }
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2zu %s  %s (%.1f s)\n    %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, sec,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed;
}
