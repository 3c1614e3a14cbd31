#include "enclosure/experiment.hpp"

#include "enclosure/record_io.hpp"
#include "enclosure/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace enclosure {
namespace {

constexpr const char* kModule = "cli";
namespace fs = std::filesystem;

// key = value text with [sections], numbers at 17 significant digits.
class Report {
 public:
  Report& section(const std::string& name) {
    os_ << (os_.tellp() > 0 ? "\n" : "") << '[' << name << "]\n";
    return *this;
  }
  template <typename T>
  Report& kv(const std::string& key, const T& value) {
    os_ << key << " = " << value << '\n';
    return *this;
  }
  Report& num(const std::string& key, double value) {
    os_ << key << " = " << fmt(value) << '\n';
    return *this;
  }
  Report& range(const std::string& key, double a, double b) {
    os_ << key << " = " << fmt(a) << ", " << fmt(b) << '\n';
    return *this;
  }
  Report& vec(const std::string& key, const Vec3& v) {
    os_ << key << " = " << fmt(v.x()) << ", " << fmt(v.y()) << ", " << fmt(v.z()) << '\n';
    return *this;
  }
  Report& comment(const std::string& text) {
    os_ << "# " << text << '\n';
    return *this;
  }
  std::string str() const { return os_.str(); }

  static std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
  }

 private:
  std::ostringstream os_;
};

void write_text(const fs::path& path, const std::string& text, ExperimentResult& result) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, kModule, "cannot write " + path.string());
  os << text;
  result.artifacts.push_back(path.string());
}

bool uses_fdtd(Pipeline p) { return p != Pipeline::Semianalytic; }
bool uses_semi(Pipeline p) { return p != Pipeline::Fdtd; }

double true_dist(const ExperimentConfig& c) { return signed_distance(c.obstacle, c.source.p) - c.source.eta; }

template <typename F>
void soft(ExperimentResult& result, const std::string& stage, std::ostream& log, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    result.failures.push_back({stage, e.code(), e.module(), e.what()});
    log << error_block(stage, e.code(), e.module(), e.what());
  }
}

fs::path need(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingArtifact, kModule, "missing artifact " + path.string());
  return path;
}

void report_distance(Report& r, const DistanceEstimate& d, double truth) {
  r.num("dist", d.dist)
      .num("slope", d.slope)
      .num("slope_stderr", d.slope_stderr)
      .range("slope_ci", d.slope_ci.first, d.slope_ci.second)
      .range("dist_ci", d.dist_ci.first, d.dist_ci.second)
      .range("tau_window", d.tau_window.first, d.tau_window.second)
      .num("positivity_onset", d.positivity_onset)
      .kv("points_used", d.points_used)
      .kv("normalization", to_string(d.normalization))
      .num("naive", d.naive)
      .num("raw_regression", d.raw_regression)
      .num("geometry_dist", truth)
      .num("relative_error", (d.dist - truth) / truth);
}

void report_limit(Report& r, const SecondOrderLimit& L, double oracle) {
  r.num("value", L.value)
      .num("raw_value", L.raw_value)
      .num("kernel_value", L.kernel_value)
      .range("tau_window", L.window.first, L.window.second)
      .num("spread", L.spread)
      .kv("order", L.order)
      .num("oracle", oracle)
      .num("ratio_to_oracle", oracle != 0 ? L.value / oracle : 0.0);
}

// Indicator CSVs of the pipelines selected in the config, computing the missing ones.
struct Series {
  std::optional<IndicatorSeries> fdtd, semi;
};

std::string window_text(const WindowReport& w) {
  Report r;
  r.section("window")
      .kv("automatic", w.automatic ? "true" : "false")
      .range("pilot_range", w.pilot_lo, w.pilot_hi)
      .num("pilot_dist", w.pilot_dist)
      .range("fit_window", w.window.lo, w.window.hi)
      .kv("truncation_limited", w.window.truncation_limited ? "true" : "false")
      .kv("fallback", w.fallback ? "true" : "false");
  return r.str();
}

void stage_simulate(const ExperimentConfig& c, const fs::path& out, std::ostream& log, ExperimentResult& result) {
  if (!uses_fdtd(c.pipeline)) {
    log << "simulate: skipped (pipeline " << to_string(c.pipeline) << ")\n";
    return;
  }
  const GridSpec grid = resolved_grid(c);
  log << "simulate: h = " << grid.h << ", box " << grid.extent->size().transpose() << "\n";
  const FieldRecord rec = run(c.obstacle, c.source, grid, {c.indicator.use_reference, false});
  log << "simulate: " << rec.steps << " steps, dt = " << rec.dt << "\n";
  if (c.write_record) {
    save_record((out / "record.bin").string(), rec);
    result.artifacts.push_back((out / "record.bin").string());
  }
  if (c.record_csv) {
    export_record_csv((out / "record.csv").string(), rec);
    result.artifacts.push_back((out / "record.csv").string());
  }
}

void stage_indicator(const ExperimentConfig& c, const fs::path& out, std::ostream& log, ExperimentResult& result) {
  std::vector<double> fdtd_taus;
  if (uses_fdtd(c.pipeline)) {
    const FieldRecord rec = load_record(need(out / "record.bin").string());
    WindowReport w;
    const IndicatorSeries s = fdtd_indicator(rec, c, &w);
    write_indicator_csv((out / "indicator_fdtd.csv").string(), s);
    result.artifacts.push_back((out / "indicator_fdtd.csv").string());
    write_text(out / "window.txt", window_text(w), result);
    log << "indicator: fdtd window [" << w.window.lo << ", " << w.window.hi << "], pilot dist " << w.pilot_dist << "\n";
    fdtd_taus = s.taus();
  }
  if (uses_semi(c.pipeline)) {
    const auto taus = fdtd_taus.empty() ? semianalytic_taus(c) : fdtd_taus;
    const IndicatorSeries s = semianalytic_series(c.obstacle, c.source, taus);
    write_indicator_csv((out / "indicator_semianalytic.csv").string(), s);
    result.artifacts.push_back((out / "indicator_semianalytic.csv").string());
    log << "indicator: semianalytic on [" << taus.front() << ", " << taus.back() << "]\n";
  }
}

void stage_extract(const ExperimentConfig& c, const fs::path& out, std::ostream& log, ExperimentResult& result) {
  Series s;
  if (uses_fdtd(c.pipeline)) s.fdtd = read_indicator_csv(need(out / "indicator_fdtd.csv").string());
  if (uses_semi(c.pipeline)) s.semi = read_indicator_csv(need(out / "indicator_semianalytic.csv").string());
  const double truth = true_dist(c);

  Report dist;
  dist.comment("dist(D, B) from the slope of log|I| against tau; windows are in units of tau");
  Report lim;
  lim.comment("limit of tau^2 e^{2 tau sqrt(eps mu) dist} I / f~^2, extrapolated in 1/tau");
  double oracle = 0;
  soft(result, "oracle", log, [&] { oracle = laplace_oracle(c.obstacle, c.source).value; });

  std::optional<double> fdtd_dist;
  auto one = [&](const char* name, const IndicatorSeries& series) {
    const DistanceEstimate d = extract_distance(series, c.source, c.distance);
    dist.section(name);
    report_distance(dist, d, truth);
    log << "extract: " << name << " dist = " << d.dist << " (geometry " << truth << ")\n";
    if (std::string(name) == "fdtd") fdtd_dist = d.dist;
    for (const auto& [label, used] : {std::pair<std::string, double>{"estimated_dist", d.dist}, {"geometry_dist", truth}}) {
      soft(result, "extract", log, [&] {
        const SecondOrderLimit L = second_order_limit(series, c.source, used, c.limit);
        lim.section(std::string(name) + "." + label).num("dist", used);
        report_limit(lim, L, oracle);
        log << "extract: " << name << " limit (" << label << ") = " << L.value << ", oracle " << oracle << "\n";
      });
    }
  };
  if (s.fdtd) one("fdtd", *s.fdtd);
  if (s.semi) one("semianalytic", *s.semi);
  if (s.fdtd && s.semi && fdtd_dist) {
    const DistanceEstimate d = extract_distance(*s.semi, c.source, c.distance);
    dist.section("comparison").num("fdtd_over_semianalytic", *fdtd_dist / d.dist);
  }
  write_text(out / "distance_report.txt", dist.str(), result);
  write_text(out / "limit_report.txt", lim.str(), result);

  // Per-tau comparison of the second-order sequences against the oracle.
  const IndicatorSeries& base = s.fdtd ? *s.fdtd : *s.semi;
  std::vector<double> fd, sa;
  if (s.fdtd) fd = normalized_sequence(*s.fdtd, c.source, truth);
  if (s.semi) sa = normalized_sequence(*s.semi, c.source, truth);
  std::ofstream os(out / "oracle_comparison.csv");
  if (!os) throw Error(ErrorCode::IoError, kModule, "cannot write oracle_comparison.csv");
  os << std::setprecision(17) << "tau,fdtd_sequence,semianalytic_sequence,oracle,fdtd_over_oracle,"
     << "semianalytic_over_oracle,fdtd_over_semianalytic\n";
  const double nan = std::nan("");
  for (std::size_t i = 0; i < base.points.size(); ++i) {
    const double f = s.fdtd ? fd[i] : nan;
    double a = nan;
    if (s.semi && s.semi->points.size() == base.points.size() && s.semi->points[i].tau == base.points[i].tau)
      a = sa[i];
    else if (s.semi && !s.fdtd)
      a = sa[i];
    os << base.points[i].tau << ',' << f << ',' << a << ',' << oracle << ',' << f / oracle << ',' << a / oracle << ','
       << f / a << '\n';
  }
  result.artifacts.push_back((out / "oracle_comparison.csv").string());
}

CurvatureRow curvature_row(const std::string& name, const ExperimentConfig& c, const double R[2]) {
  Vec3 q, nu;
  const auto sources = curvature_sources(c, &q, &nu);
  const double s[2] = {c.curvature.s1, c.curvature.s2};
  const double eta[2] = {c.curvature.eta1, c.curvature.eta2};
  const double d_p = (c.source.p - q).norm();
  CurvatureRow row;
  row.source = name;
  row.R1 = R[0];
  row.R2 = R[1];
  row.result = recover_curvatures(R, s, d_p, eta, c.source.a.dot(nu), c.source.eps, c.source.mu);
  const SurfacePoint sp = nearest_point(c.obstacle, c.source.p);
  const Curvatures truth = curvature_invariants(shape_operator(c.obstacle, sp));
  row.K_true = truth.K;
  row.H_true = truth.H;
  return row;
}

void write_curvature(const fs::path& path, const std::vector<CurvatureRow>& rows, ExperimentResult& result) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, kModule, "cannot write " + path.string());
  os << std::setprecision(17);
  os << "# H follows S = -d(nu) with outward nu: a sphere of radius R has K = 1/R^2 and H = -1/R\n";
  os << "source,R1,R2,lambda1,lambda2,K,H,K_true,H_true,residual,negative_discriminant\n";
  for (const auto& r : rows)
    os << r.source << ',' << r.R1 << ',' << r.R2 << ',' << r.result.lambda[0] << ',' << r.result.lambda[1] << ','
       << r.result.K << ',' << r.result.H << ',' << r.K_true << ',' << r.H_true << ',' << r.result.residual << ','
       << (r.result.negative_discriminant ? "true" : "false") << '\n';
  result.artifacts.push_back(path.string());
}

void stage_oracle(const ExperimentConfig& c, const fs::path& out, std::ostream& log, ExperimentResult& result) {
  const OracleResult o = laplace_oracle(c.obstacle, c.source);
  Report r;
  r.comment("limit of tau^2 e^{2 tau sqrt(eps mu) dist} I / f~^2 as tau -> infinity");
  r.comment("shape operators use S = -d(nu) with outward nu (sphere of radius R: S = -I/R)");
  r.section("oracle")
      .num("value", o.value)
      .num("energy_value", o.energy_value())
      .num("d_boundary", o.d_boundary)
      .num("dist", o.d_boundary - c.source.eta)
      .num("prefactor", o.prefactor)
      .kv("reflectors", o.reflectors.size());
  for (std::size_t i = 0; i < o.reflectors.size(); ++i) {
    const auto& q = o.reflectors[i];
    const Curvatures k = curvature_invariants(q.shape);
    r.section("reflector." + std::to_string(i))
        .vec("q", q.q)
        .vec("nu", q.nu)
        .num("det", q.det)
        .num("directional", q.directional)
        .num("K", k.K)
        .num("H", k.H);
  }
  write_text(out / "oracle_report.txt", r.str(), result);
  log << "oracle: " << o.value << "\n";

  if (c.curvature.enabled) {
    std::vector<CurvatureRow> rows;
    const auto sources = curvature_sources(c);
    double R[2];
    for (int j = 0; j < 2; ++j) R[j] = laplace_oracle(c.obstacle, sources[j]).value;
    rows.push_back(curvature_row("oracle", c, R));
    soft(result, "oracle", log, [&] {
      double Rs[2];
      for (int j = 0; j < 2; ++j) {
        ExperimentConfig cj = c;
        cj.source = sources[j];
        const double k = sources[j].slowness() * true_dist(cj);
        const IndicatorSeries s = semianalytic_series(c.obstacle, sources[j], tau_grid(20 / k, 320 / k, c.tau.count));
        LimitOptions lo = c.limit;
        lo.sequence = LimitSequence::Raw;
        Rs[j] = second_order_limit(s, sources[j], true_dist(cj), lo).value;
      }
      rows.push_back(curvature_row("semianalytic", c, Rs));
    });
    if (c.curvature.fdtd && uses_fdtd(c.pipeline)) {
      soft(result, "oracle", log, [&] {
        double Rf[2];
        for (int j = 0; j < 2; ++j) {
          ExperimentConfig cj = c;
          cj.source = sources[j];
          const FieldRecord rec = run(c.obstacle, sources[j], resolved_grid(cj), {c.indicator.use_reference, false});
          const IndicatorSeries s = fdtd_indicator(rec, cj);
          const DistanceEstimate d = extract_distance(s, sources[j], c.distance);
          Rf[j] = second_order_limit(s, sources[j], d.dist, c.limit).value;
        }
        rows.push_back(curvature_row("fdtd", c, Rf));
      });
    }
    write_curvature(out / "curvature_table.csv", rows, result);
    for (const auto& row : rows) log << "curvature: " << row.source << " K = " << row.result.K << ", H = " << row.result.H << "\n";
  }
}

void stage_reflect(const ExperimentConfig& c, const fs::path& out, std::ostream& log, ExperimentResult& result) {
  const ReflectionConfig& rc = c.reflection;
  const double h_fd = rc.h_fd > 0 ? rc.h_fd : default_fd_step(c.obstacle);
  const auto samples = surface_samples(c.obstacle, rc.samples);
  const auto residual_base = surface_samples(c.obstacle, rc.residual_points);
  std::vector<ReflectionRow> rows;
  Report r;
  r.comment("tangential trace: max |V* x nu + V x nu| / max |V|; curl trace: max |nu x (curl V* - curl V)| / max |nu x curl V|");
  r.comment("residual envelope: |(1/(mu eps)) curl curl V* + tau^2 V*| <= C1 (|V| + |V'|) + C2 d |grad^2 V| at x^r");
  for (double tau : rc.taus) {
    const ReflectedField field = make_reflected_field(c.obstacle, c.source, tau);
    const TraceReport tr = check_tangential_trace(field, samples);
    const CurlTraceReport cr = check_curl_trace(field, samples, h_fd);
    std::vector<ResidualReport> res;
    for (const auto& x : residual_base) {
      const SurfacePoint sp = nearest_point(c.obstacle, x);
      for (double off : rc.residual_offsets) res.push_back(residual_structure(field, sp.q + off * sp.nu, h_fd / 4));
    }
    const ResidualFit fit = fit_residual_bound(res);
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
      rows.push_back({tr.points[i], "tangential_trace_tau_" + Report::fmt(tau), tr.deviation[i] / tr.scale, 0});
      rows.push_back({cr.points[i], "curl_trace_tau_" + Report::fmt(tau), cr.deviation[i] / cr.scale, cr.order});
    }
    for (const auto& x : res)
      rows.push_back({x.x, "residual_tau_" + Report::fmt(tau) + "_d_" + Report::fmt(x.d), x.residual, 0});
    r.section("tau." + Report::fmt(tau))
        .num("tau", tau)
        .num("tangential_relative", tr.relative())
        .num("curl_relative", cr.relative)
        .num("curl_relative_half_step", cr.relative_half)
        .num("curl_order", cr.order)
        .num("h_fd", h_fd)
        .num("C1", fit.C1)
        .num("C2", fit.C2);
    log << "reflectcheck: tau " << tau << " trace " << tr.relative() << ", curl " << cr.relative << " (order "
        << cr.order << "), C2 " << fit.C2 << "\n";
  }
  write_reflection_csv((out / "reflection_check.csv").string(), rows);
  result.artifacts.push_back((out / "reflection_check.csv").string());
  write_text(out / "reflection_summary.txt", r.str(), result);
}

void stage_probe(const ExperimentConfig& c, const fs::path& out, std::ostream& log, ExperimentResult& result) {
  const auto& p = c.source.p;
  std::vector<Vec3> reflector_dirs;
  for (const auto& q : first_reflector(c.obstacle, p)) reflector_dirs.push_back((q.q - p).normalized());
  // One grid direction points at a reflection point; the others fall where the grid puts them.
  const auto dirs = icosahedral_directions(c.probe.level, reflector_dirs.front());
  const DistanceProbe truth = [&](const Vec3& x) { return signed_distance(c.obstacle, x); };
  const auto outcomes = probe_sweep(truth, p, dirs, c.probe.s, c.probe.tol);
  std::ofstream os(out / "probe_table.csv");
  if (!os) throw Error(ErrorCode::IoError, kModule, "cannot write probe_table.csv");
  os << std::setprecision(17) << "omega_x,omega_y,omega_z,deviation,on_reflector,geometry_truth\n";
  int hits = 0, agree = 0;
  for (const auto& o : outcomes) {
    bool truth_hit = false;
    for (const auto& w : reflector_dirs) truth_hit = truth_hit || (o.omega - w).norm() < 1e-9;
    hits += o.on_reflector;
    agree += o.on_reflector == truth_hit;
    os << o.omega.x() << ',' << o.omega.y() << ',' << o.omega.z() << ',' << o.deviation << ','
       << (o.on_reflector ? "true" : "false") << ',' << (truth_hit ? "true" : "false") << '\n';
  }
  result.artifacts.push_back((out / "probe_table.csv").string());
  log << "probe: " << outcomes.size() << " directions, " << hits << " on a reflector, " << agree
      << " agree with geometry\n";
}

}  // namespace

Stage parse_stage(const std::string& name) {
  if (name == "all") return Stage::All;
  if (name == "simulate") return Stage::Simulate;
  if (name == "indicator") return Stage::Indicator;
  if (name == "extract") return Stage::Extract;
  if (name == "oracle") return Stage::Oracle;
  if (name == "reflectcheck") return Stage::ReflectCheck;
  if (name == "probe") return Stage::Probe;
  throw Error(ErrorCode::InvalidArgument, kModule, "unknown stage " + name);
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::All: return "all";
    case Stage::Simulate: return "simulate";
    case Stage::Indicator: return "indicator";
    case Stage::Extract: return "extract";
    case Stage::Oracle: return "oracle";
    case Stage::ReflectCheck: return "reflectcheck";
    case Stage::Probe: return "probe";
  }
  return "?";
}

GridSpec resolved_grid(const ExperimentConfig& config) {
  GridSpec g = config.grid;
  if (!g.extent) g.extent = causal_extent(config.source, config.obstacle, config.causal_margin);
  return g;
}

IndicatorSeries fdtd_indicator(const FieldRecord& record, const ExperimentConfig& config, WindowReport* report) {
  const SourceSpec& spec = record.spec;
  const TauConfig& t = config.tau;
  const double limit = t.policy.resolution / (record.h * spec.slowness());
  WindowReport w;
  w.automatic = t.automatic;
  w.pilot_lo = t.min;
  w.pilot_hi = t.max > 0 ? t.max : limit;
  if (!(w.pilot_hi > w.pilot_lo)) throw Error(ErrorCode::NoPositiveWindow, kModule, "tau range is empty");
  IndicatorSeries series = indicator_series(record, spec, tau_grid(w.pilot_lo, w.pilot_hi, t.count, t.spacing),
                                            config.indicator);
  if (t.automatic) {
    w.pilot_dist = extract_distance(series, spec, config.distance).dist;
    w.window = stable_tau_window(spec, record.h, w.pilot_dist, t.policy);
    w.window.lo = std::max(w.window.lo, w.pilot_lo);
    w.window.hi = std::min(w.window.hi, w.pilot_hi);
    if (w.window.hi < 1.25 * w.window.lo) {
      w.fallback = true;
      w.window.lo = 0.5 * (w.pilot_lo + w.pilot_hi);
      w.window.hi = w.pilot_hi;
    }
    series = indicator_series(record, spec, tau_grid(w.window.lo, w.window.hi, t.count, t.spacing), config.indicator);
  } else {
    w.window = {w.pilot_lo, w.pilot_hi, false};
  }
  if (report) *report = w;
  return series;
}

std::vector<double> semianalytic_taus(const ExperimentConfig& config) {
  const TauConfig& t = config.tau;
  const double k = config.source.slowness() * true_dist(config);
  const double lo = t.automatic ? std::max(t.min, 4.0 / k) : t.min;
  const double hi = t.max > 0 ? t.max : 40.0 / k;
  if (!(hi > lo)) throw Error(ErrorCode::NoPositiveWindow, kModule, "tau range is empty");
  return tau_grid(lo, hi, t.count, t.spacing);
}

std::vector<double> normalized_sequence(const IndicatorSeries& series, const SourceSpec& spec, double dist) {
  std::vector<double> out;
  for (const auto& p : series.points) {
    const double ft = laplace_pulse(spec.pulse, p.tau, spec.T);
    if (p.I.sign == 0 || ft == 0) {
      out.push_back(0);
      continue;
    }
    out.push_back(p.I.sign * std::exp(p.I.log_abs + 2 * std::log(p.tau) + 2 * p.tau * spec.slowness() * dist -
                                      2 * std::log(std::abs(ft))));
  }
  return out;
}

std::vector<SourceSpec> curvature_sources(const ExperimentConfig& config, Vec3* q_out, Vec3* nu_out) {
  const auto refl = first_reflector(config.obstacle, config.source.p);
  if (refl.size() != 1)
    throw Error(ErrorCode::HypothesisViolated, kModule, "curvature recovery needs a single first reflection point");
  const Vec3 q = refl.front().q;
  const Vec3 dir = (q - config.source.p).normalized();
  const double d_p = (q - config.source.p).norm();
  const double s[2] = {config.curvature.s1, config.curvature.s2};
  const double eta[2] = {config.curvature.eta1, config.curvature.eta2};
  std::vector<SourceSpec> out;
  for (int j = 0; j < 2; ++j) {
    if (!(s[j] + eta[j] < d_p))
      throw Error(ErrorCode::Overlap, kModule, "curvature source ball meets the obstacle");
    SourceSpec sj = config.source;
    sj.p = config.source.p + s[j] * dir;
    sj.eta = eta[j];
    out.push_back(sj);
  }
  if (q_out) *q_out = q;
  if (nu_out) *nu_out = refl.front().nu;
  return out;
}

std::string error_block(const std::string& stage, ErrorCode code, const std::string& module,
                        const std::string& message) {
  std::ostringstream os;
  os << "[error]\nstage = " << stage << "\ncode = " << to_string(code) << "\nmodule = " << module
     << "\nmessage = " << message << "\n";
  return os.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config, Stage stage, std::ostream& log) {
  ExperimentResult result;
  const fs::path out(config.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::IoError, kModule, "cannot create " + out.string());

  const SourceDiagnostics dg = validate_source(config.source, config.obstacle);
  for (const auto& w : dg.warnings) log << "warning: " << w << "\n";
  write_text(out / "config_resolved.ini", dump_config(config), result);

  const bool all = stage == Stage::All;
  if (all || stage == Stage::Simulate) stage_simulate(config, out, log, result);
  if (all || stage == Stage::Indicator) stage_indicator(config, out, log, result);
  if (all || stage == Stage::Extract) stage_extract(config, out, log, result);
  if (all || stage == Stage::Oracle) {
    if (all)
      soft(result, "oracle", log, [&] { stage_oracle(config, out, log, result); });
    else
      stage_oracle(config, out, log, result);
  }
  if ((all && config.reflection.enabled) || stage == Stage::ReflectCheck) stage_reflect(config, out, log, result);
  if ((all && config.probe.enabled) || stage == Stage::Probe) stage_probe(config, out, log, result);
  return result;
}

}  // namespace enclosure
