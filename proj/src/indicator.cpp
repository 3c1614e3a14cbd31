#include "enclosure/indicator.hpp"

#include "enclosure/freefield.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

namespace enclosure {
namespace {

constexpr const char* kModule = "indicator";

struct LineFit {
  double slope = 0, intercept = 0, slope_stderr = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    A(i, 0) = 1;
    A(i, 1) = x[i];
    b[i] = y[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  LineFit f{c[1], c[0], 0};
  if (n > 2) {
    const double rss = (A * c - b).squaredNorm();
    const double xm = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double sxx = 0;
    for (double v : x) sxx += (v - xm) * (v - xm);
    f.slope_stderr = std::sqrt(rss / (n - 2) / sxx);
  }
  return f;
}

double weight_sum_expected(const SourceSpec& spec) { return 4.0 / 3.0 * std::numbers::pi * std::pow(spec.eta, 3); }

}  // namespace

Eigen::VectorXd laplace_columns(const RecordMatrix& rows, double dt, double tau, double shift) {
  const Eigen::Index N = rows.rows();
  Eigen::VectorXd w(N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const double end = (n == 0 || n == N - 1) ? 0.5 : 1.0;
    w[n] = end * dt * std::exp(-tau * (n * dt - shift));
  }
  return rows.transpose() * w;
}

Eigen::VectorXd laplace_field(const FieldRecord& record, double tau) {
  if (!(tau > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "tau must be positive");
  return laplace_columns(record.samples, record.dt, tau);
}

std::vector<double> IndicatorSeries::taus() const {
  std::vector<double> t;
  for (const auto& p : points) t.push_back(p.tau);
  return t;
}

void IndicatorSeries::check() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && !(points[i].tau > points[i - 1].tau))
      throw Error(ErrorCode::InvalidArgument, kModule, "tau grid must be strictly increasing");
    if (points[i].I.sign != 0 && !std::isfinite(points[i].I.log_abs))
      throw Error(ErrorCode::InvalidArgument, kModule, "non-finite indicator value");
  }
}

IndicatorPoint indicator_point(const FieldRecord& record, const SourceSpec& spec, double tau,
                               const IndicatorOptions& options) {
  if (!(tau > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "tau must be positive");
  const double wsum = std::accumulate(record.weights.begin(), record.weights.end(), 0.0);
  if (std::abs(wsum - weight_sum_expected(spec)) > 1e-6 * weight_sum_expected(spec))
    throw Error(ErrorCode::DegenerateQuadrature, kModule, "node weights do not sum to |B|");
  const Eigen::Map<const Eigen::VectorXd> w(record.weights.data(), static_cast<Eigen::Index>(record.weights.size()));

  const double ftilde = laplace_pulse(spec.pulse, tau, spec.T);
  const double dt = record.dt;
  double s = tau;
  double log_rescale = 0;
  int sign_rescale = 1;
  if (options.dispersion_matched) {
    const double kt = tau * spec.slowness();
    s = 2.0 / dt * std::asinh(dt / (record.h * spec.slowness()) * std::sinh(0.5 * kt * record.h));
    double fhat = 0;
    for (int n = 0; n < record.steps; ++n) fhat += dt * spec.pulse((n + 0.5) * dt) * std::exp(-s * (n + 0.5) * dt);
    if (fhat == 0 || ftilde == 0) throw Error(ErrorCode::InvalidArgument, kModule, "pulse transform vanishes");
    log_rescale = std::log(std::abs(ftilde / fhat));
    sign_rescale = (ftilde / fhat) > 0 ? 1 : -1;
  }

  IndicatorPoint pt;
  pt.tau = tau;
  const Eigen::VectorXd We = laplace_columns(record.samples, dt, s);
  pt.aWe_norm = std::sqrt(w.dot(We.cwiseProduct(We)));

  double sum = 0, shift = 0;
  if (options.use_reference && record.reference) {
    const RecordMatrix diff = record.samples - *record.reference;
    Eigen::Index n0 = 0;
    while (n0 < diff.rows() && diff.row(n0).cwiseAbs().maxCoeff() == 0) ++n0;
    const Eigen::VectorXd Wr = laplace_columns(*record.reference, dt, s);
    pt.aV_norm = std::sqrt(w.dot(Wr.cwiseProduct(Wr)));
    if (n0 < diff.rows()) {
      shift = n0 * dt;
      sum = w.dot(laplace_columns(diff, dt, s, shift));
    }
  } else {
    const auto pf = ProbeField<double>::make(spec, tau);
    Eigen::VectorXd aV(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) aV[i] = spec.a.dot(V_field_anywhere<double>(record.nodes[i], pf));
    pt.aV_norm = std::sqrt(w.dot(aV.cwiseProduct(aV)));
    sum = w.dot(We - aV);
  }
  if (sum == 0 || ftilde == 0) return pt;
  pt.I.sign = -(ftilde > 0 ? 1 : -1) * (sum > 0 ? 1 : -1) * sign_rescale;
  pt.I.log_abs = std::log(tau / spec.eps) + std::log(std::abs(ftilde)) + std::log(std::abs(sum)) - s * shift + log_rescale;
  return pt;
}

IndicatorSeries indicator_series(const FieldRecord& record, const SourceSpec& spec, const std::vector<double>& taus,
                                 const IndicatorOptions& options) {
  IndicatorSeries series;
  series.origin = "fdtd";
  series.points.resize(taus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < taus.size(); ++i) series.points[i] = indicator_point(record, spec, taus[i], options);
  series.check();
  return series;
}

std::vector<double> tau_grid(double tau_min, double tau_max, int count, TauSpacing spacing) {
  if (!(tau_min > 0) || !(tau_max > tau_min) || count < 2)
    throw Error(ErrorCode::InvalidArgument, kModule, "tau grid needs 0 < min < max and count >= 2");
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) {
    const double u = static_cast<double>(i) / (count - 1);
    t[i] = spacing == TauSpacing::Log ? tau_min * std::pow(tau_max / tau_min, u) : tau_min + u * (tau_max - tau_min);
  }
  return t;
}

void write_indicator_csv(const std::string& path, const IndicatorSeries& series) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, kModule, "cannot open " + path);
  out << "tau,sign,log_abs_I,aWe_norm,aV_norm\n" << std::setprecision(17);
  for (const auto& p : series.points)
    out << p.tau << ',' << p.I.sign << ',' << p.I.log_abs << ',' << p.aWe_norm << ',' << p.aV_norm << '\n';
}

IndicatorSeries read_indicator_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, kModule, "cannot open indicator CSV " + path);
  IndicatorSeries s;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell[5];
    for (auto& c : cell) std::getline(ss, c, ',');
    IndicatorPoint p;
    p.tau = std::stod(cell[0]);
    p.I.sign = std::stoi(cell[1]);
    p.I.log_abs = std::stod(cell[2]);
    p.aWe_norm = std::stod(cell[3]);
    p.aV_norm = std::stod(cell[4]);
    s.points.push_back(p);
  }
  s.check();
  return s;
}

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::None: return "none";
    case Normalization::Pulse: return "pulse";
    case Normalization::Kernel: return "kernel";
  }
  return "?";
}

DistanceEstimate extract_distance(const IndicatorSeries& series, const SourceSpec& spec,
                                  const DistanceOptions& options) {
  series.check();
  const auto& pts = series.points;
  // Longest run of consecutive positive values.
  int best_lo = 0, best_len = 0;
  for (int i = 0; i < static_cast<int>(pts.size());) {
    if (pts[i].I.sign <= 0) {
      ++i;
      continue;
    }
    int j = i;
    while (j < static_cast<int>(pts.size()) && pts[j].I.sign > 0) ++j;
    if (j - i >= best_len) {
      best_lo = i;
      best_len = j - i;
    }
    i = j;
  }
  if (best_len < options.min_points)
    throw Error(ErrorCode::NoPositiveWindow, kModule, "fewer than the required positive indicator values");

  const double c2 = 2 * spec.slowness();
  std::vector<int> idx(best_len);
  std::iota(idx.begin(), idx.end(), best_lo);
  std::vector<double> y_all(pts.size());
  for (int i : idx) {
    double y = pts[i].I.log_abs;
    const double tau = pts[i].tau;
    if (options.normalization == Normalization::Pulse) {
      y += 2 * std::log(tau) - 2 * std::log(std::abs(laplace_pulse(spec.pulse, tau, spec.T)));
    } else if (options.normalization == Normalization::Kernel) {
      y -= 2 * ProbeField<double>::make(spec, tau).log_amplitude();
    }
    y_all[i] = y;
  }

  auto fit_subset = [&](const std::vector<int>& sub, bool raw) {
    std::vector<double> x, y;
    for (int i : sub) {
      x.push_back(pts[i].tau);
      y.push_back(raw ? pts[i].I.log_abs : y_all[i]);
    }
    return fit_line(x, y);
  };

  LineFit fit = fit_subset(idx, false);
  for (int iter = 0; iter < 10; ++iter) {
    std::vector<double> res;
    for (int i : idx) res.push_back(std::abs(y_all[i] - fit.intercept - fit.slope * pts[i].tau));
    std::vector<double> sorted = res;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double med = sorted[sorted.size() / 2];
    if (med <= 0) break;
    std::vector<int> kept;
    for (std::size_t k = 0; k < idx.size(); ++k)
      if (res[k] <= options.trim_factor * med) kept.push_back(idx[k]);
    if (kept.size() == idx.size() || static_cast<int>(kept.size()) < options.min_points) break;
    idx = kept;
    fit = fit_subset(idx, false);
  }

  DistanceEstimate est;
  est.normalization = options.normalization;
  est.slope = fit.slope;
  est.slope_stderr = fit.slope_stderr;
  est.slope_ci = {fit.slope - 1.96 * fit.slope_stderr, fit.slope + 1.96 * fit.slope_stderr};
  const double offset = options.normalization == Normalization::Kernel ? spec.eta : 0.0;
  est.dist = std::max(0.0, -fit.slope / c2 - offset);
  est.dist_ci = {-est.slope_ci.second / c2 - offset, -est.slope_ci.first / c2 - offset};
  est.tau_window = {pts[idx.front()].tau, pts[idx.back()].tau};
  est.positivity_onset = pts[best_lo].tau;
  est.points_used = static_cast<int>(idx.size());
  est.raw_regression = -fit_subset(idx, true).slope / c2;
  const auto& top = pts[best_lo + best_len - 1];
  est.naive = top.I.log_abs / top.tau / (-c2);
  return est;
}

double richardson_limit(const std::vector<double>& tau, const std::vector<double>& s, int order) {
  const int n = static_cast<int>(tau.size());
  order = std::min(order, n - 1);
  if (n == 0) throw Error(ErrorCode::InvalidArgument, kModule, "empty sequence");
  const double t0 = *std::min_element(tau.begin(), tau.end());
  Eigen::MatrixXd A(n, order + 1);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double u = t0 / tau[i];
    double p = 1;
    for (int k = 0; k <= order; ++k) {
      A(i, k) = p;
      p *= u;
    }
    b[i] = s[i];
  }
  return A.colPivHouseholderQr().solve(b)[0];
}

SecondOrderLimit second_order_limit(const IndicatorSeries& series, const SourceSpec& spec, double dist,
                                    const LimitOptions& options) {
  series.check();
  std::vector<double> tau, raw, ker;
  const double kt = spec.slowness();
  for (const auto& p : series.points) {
    if (p.tau < options.tau_min || p.I.sign == 0) continue;
    const auto pf = ProbeField<double>::make(spec, p.tau);
    const double lr = 2 * std::log(p.tau) + 2 * kt * p.tau * dist + p.I.log_abs - 2 * pf.log_abs_ftilde;
    const double lk = 2 * std::log(spec.eta / (2 * spec.eps)) + 2 * kt * p.tau * (dist + spec.eta) + p.I.log_abs -
                      2 * pf.log_amplitude();
    tau.push_back(p.tau);
    raw.push_back(p.I.sign * std::exp(lr));
    ker.push_back(p.I.sign * std::exp(lk));
  }
  const int n = static_cast<int>(tau.size());
  if (n < 2) throw Error(ErrorCode::Divergent, kModule, "too few indicator values for the limit");
  const int half = std::max(std::min(n, options.order + 2), (n + 1) / 2);
  const std::vector<double> t_top(tau.end() - half, tau.end());
  const std::vector<double> r_top(raw.end() - half, raw.end()), k_top(ker.end() - half, ker.end());
  const int order = std::min(options.order, half - 1);

  SecondOrderLimit out;
  out.order = order;
  out.raw_value = richardson_limit(t_top, r_top, order);
  out.kernel_value = richardson_limit(t_top, k_top, order);
  const bool use_raw = options.sequence == LimitSequence::Raw;
  out.value = use_raw ? out.raw_value : out.kernel_value;
  out.tau = t_top;
  out.sequence = use_raw ? r_top : k_top;
  out.window = {t_top.front(), t_top.back()};

  double scale = std::abs(out.value);
  for (double v : out.sequence) scale = std::max(scale, std::abs(v));
  if (half > order + 2) {
    const std::vector<double> ta(t_top.begin() + 1, t_top.end()), sa(out.sequence.begin() + 1, out.sequence.end());
    const std::vector<double> tb(t_top.begin(), t_top.end() - 1), sb(out.sequence.begin(), out.sequence.end() - 1);
    out.spread = std::max(std::abs(richardson_limit(ta, sa, order) - out.value),
                          std::abs(richardson_limit(tb, sb, order) - out.value)) /
                 scale;
  }
  if (!(out.spread <= options.cauchy_tol))
    throw Error(ErrorCode::Divergent, kModule, "normalized sequence is not Cauchy across the top half of the window");
  return out;
}

TauWindow stable_tau_window(const SourceSpec& spec, double h, double pilot_dist, const WindowPolicy& policy) {
  if (!(h > 0) || !(policy.resolution > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "window needs h > 0");
  TauWindow w;
  w.hi = policy.resolution / (h * spec.slowness());
  const double slack = spec.T - 2 * spec.slowness() * pilot_dist;
  if (slack > 0) {
    w.lo = policy.truncation / slack;
    w.truncation_limited = true;
  } else {
    w.lo = w.hi / 2;
  }
  return w;
}

}  // namespace enclosure
