#include "enclosure/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace enclosure {
namespace {

constexpr const char* kModule = "fdtd";
const Vec3 kOffset[3] = {Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), Vec3(0, 0, 0.5)};

// Fraction of the axis-aligned cube (center c, half-width r) inside the ball |x - p| <= eta.
double ball_fraction(const Vec3& c, double r, const Vec3& p, double eta, int depth) {
  const Vec3 d = (c - p).cwiseAbs();
  if ((d - Vec3::Constant(r)).cwiseMax(0.0).norm() >= eta) return 0;
  if ((d + Vec3::Constant(r)).norm() <= eta) return 1;
  if (depth == 0) return (c - p).norm() <= eta ? 1 : 0;
  double s = 0;
  for (int o = 0; o < 8; ++o) {
    const Vec3 sgn((o & 1) ? 1 : -1, (o & 2) ? 1 : -1, (o & 4) ? 1 : -1);
    s += ball_fraction(c + 0.5 * r * sgn, 0.5 * r, p, eta, depth - 1);
  }
  return s / 8;
}

std::vector<double>& field(SimState& s, int c) { return c == 0 ? s.ex : (c == 1 ? s.ey : s.ez); }
const std::vector<double>& field(const SimState& s, int c) { return c == 0 ? s.ex : (c == 1 ? s.ey : s.ez); }

void add_mur_taps(SimState& s) {
  const std::int64_t sx = static_cast<std::int64_t>(s.ny) * s.nz, sy = s.nz;
  auto add = [&](int comp, int i, int j, int k, std::int64_t stride) {
    s.mur_taps.push_back({comp, s.index(i, j, k), s.index(i, j, k) + stride});
  };
  for (int side = 0; side < 2; ++side) {
    const int ib = side ? s.nx - 1 : 0, jb = side ? s.ny - 1 : 0, kb = side ? s.nz - 1 : 0;
    const std::int64_t ox = side ? -sx : sx, oy = side ? -sy : sy, oz = side ? -1 : 1;
    for (int j = 0; j < s.ny - 1; ++j)
      for (int k = 1; k < s.nz - 1; ++k) add(1, ib, j, k, ox);
    for (int j = 1; j < s.ny - 1; ++j)
      for (int k = 0; k < s.nz - 1; ++k) add(2, ib, j, k, ox);
    for (int i = 0; i < s.nx - 1; ++i)
      for (int k = 1; k < s.nz - 1; ++k) add(0, i, jb, k, oy);
    for (int i = 1; i < s.nx - 1; ++i)
      for (int k = 0; k < s.nz - 1; ++k) add(2, i, jb, k, oy);
    for (int i = 0; i < s.nx - 1; ++i)
      for (int j = 1; j < s.ny - 1; ++j) add(0, i, j, kb, oz);
    for (int i = 1; i < s.nx - 1; ++i)
      for (int j = 0; j < s.ny - 1; ++j) add(1, i, j, kb, oz);
  }
  s.mur_old.assign(2 * s.mur_taps.size(), 0.0);
}

}  // namespace

int configured_threads() {
  if (const char* env = std::getenv("ENCLOSURE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Box causal_extent(const SourceSpec& spec, const Obstacle&, double margin) {
  const double L = 0.5 * spec.speed() * spec.T + spec.eta + margin;
  return {spec.p - Vec3::Constant(L), spec.p + Vec3::Constant(L)};
}

SimState build_sim(const Obstacle& obstacle, const SourceSpec& spec, const GridSpec& grid) {
  spec.check();
  if (!(grid.h > 0)) throw Error(ErrorCode::InvalidArgument, kModule, "grid spacing must be positive");
  if (!(grid.cfl > 0 && grid.cfl <= 1)) throw Error(ErrorCode::InvalidArgument, kModule, "cfl must lie in (0, 1]");
  const double h = grid.h;
  if (!grid.allow_coarse) {
    if (spec.eta / h < 4) throw Error(ErrorCode::ResolutionTooCoarse, kModule, "eta / h < 4");
    if (!obstacle.empty() && min_curvature_radius(obstacle) / h < 8)
      throw Error(ErrorCode::ResolutionTooCoarse, kModule, "minimal curvature radius / h < 8");
  }
  const Box box = grid.extent.value_or(causal_extent(spec, obstacle));
  if (grid.boundary == OuterBoundary::Causal) {
    const Box causal = causal_extent(spec, obstacle, 0.0);
    const Box need{causal.lo + Vec3::Constant(1e-9), causal.hi - Vec3::Constant(1e-9)};
    if (!box.contains(need)) throw Error(ErrorCode::DomainTooSmall, kModule, "extent smaller than the causal box");
  }
  const Box ball{spec.p - Vec3::Constant(spec.eta + 2 * h), spec.p + Vec3::Constant(spec.eta + 2 * h)};
  if (!box.contains(ball)) throw Error(ErrorCode::DomainTooSmall, kModule, "probe ball not inside the extent");

  SimState s;
  s.h = h;
  s.eps = spec.eps;
  s.mu = spec.mu;
  s.boundary = grid.boundary;
  Eigen::Vector3i lo, n;
  for (int d = 0; d < 3; ++d) {
    lo[d] = static_cast<int>(std::floor(box.lo[d] / h + 1e-9));
    const int hi = static_cast<int>(std::ceil(box.hi[d] / h - 1e-9));
    n[d] = hi - lo[d] + 1;
  }
  s.nx = n[0];
  s.ny = n[1];
  s.nz = n[2];
  s.origin = h * lo.cast<double>();

  const double dt_max = grid.cfl * h / (spec.speed() * std::sqrt(3.0));
  if (grid.dt > 0 && grid.dt > dt_max * (1 + 1e-12))
    throw Error(ErrorCode::InvalidArgument, kModule, "dt violates the cfl bound");
  const double base = grid.dt > 0 ? grid.dt : dt_max;
  s.steps = static_cast<int>(std::ceil(spec.T / base - 1e-9));
  s.dt = spec.T / s.steps;

  const std::size_t total = static_cast<std::size_t>(s.nx) * s.ny * s.nz;
  for (auto* f : {&s.ex, &s.ey, &s.ez, &s.hx, &s.hy, &s.hz}) f->assign(total, 0.0);

  if (!obstacle.empty()) {
    const auto comps = obstacle.components();
    std::vector<std::uint8_t> inside(total, 0);
    std::int64_t count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static)
    for (int i = 0; i < s.nx; ++i)
      for (int j = 0; j < s.ny; ++j)
        for (int k = 0; k < s.nz; ++k) {
          const Vec3 x = s.node(i, j, k);
          for (const auto& c : comps) {
            const Vec3 y = c.frame.transpose() * (x - c.center);
            if (y.cwiseQuotient(c.semiaxes).squaredNorm() <= 1) {
              inside[s.index(i, j, k)] = 1;
              ++count;
              break;
            }
          }
        }
    s.masked_nodes = count;
    const std::int64_t step[3] = {static_cast<std::int64_t>(s.ny) * s.nz, s.nz, 1};
    for (int c = 0; c < 3; ++c) {
      const int ni = s.nx - (c == 0), nj = s.ny - (c == 1), nk = s.nz - (c == 2);
      for (int i = 0; i < ni; ++i)
        for (int j = 0; j < nj; ++j)
          for (int k = 0; k < nk; ++k) {
            const std::int64_t id = s.index(i, j, k);
            if (inside[id] && inside[id + step[c]]) s.pec[c].push_back(id);
          }
    }
  }

  // Source footprint: edges whose dual cell meets the ball.
  const double reach = spec.eta + h;
  for (int c = 0; c < 3; ++c) {
    if (spec.a[c] == 0) continue;
    Eigen::Vector3i a0, a1;
    for (int d = 0; d < 3; ++d) {
      a0[d] = std::max(0, static_cast<int>(std::floor((spec.p[d] - reach - s.origin[d]) / h)) - 1);
      a1[d] = std::min(n[d] - 1, static_cast<int>(std::ceil((spec.p[d] + reach - s.origin[d]) / h)) + 1);
    }
    for (int i = a0[0]; i <= a1[0]; ++i)
      for (int j = a0[1]; j <= a1[1]; ++j)
        for (int k = a0[2]; k <= a1[2]; ++k) {
          if ((c == 0 && i == s.nx - 1) || (c == 1 && j == s.ny - 1) || (c == 2 && k == s.nz - 1)) continue;
          const Vec3 mid = s.origin + h * (Vec3(i, j, k) + kOffset[c]);
          const double frac = ball_fraction(mid, 0.5 * h, spec.p, spec.eta, grid.source_depth);
          if (frac > 0) s.source[c].push_back({s.index(i, j, k), frac * spec.a[c]});
        }
  }

  double fmax = 0;
  for (int m = 0; m <= 2000; ++m) fmax = std::max(fmax, std::abs(spec.pulse(spec.T * m / 2000.0)));
  s.source_scale = fmax * spec.T / spec.eps;
  if (grid.boundary == OuterBoundary::Mur) add_mur_taps(s);
  return s;
}

void step(SimState& s, const SourceSpec& spec) {
  const int nx = s.nx, ny = s.ny, nz = s.nz;
  const std::int64_t sx = static_cast<std::int64_t>(ny) * nz, sy = nz;
  const double cb = s.dt / (s.mu * s.h), ca = s.dt / (s.eps * s.h);
  double* ex = s.ex.data();
  double* ey = s.ey.data();
  double* ez = s.ez.data();
  double* hx = s.hx.data();
  double* hy = s.hy.data();
  double* hz = s.hz.data();

#pragma omp parallel for schedule(static)
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const std::int64_t base = (static_cast<std::int64_t>(i) * ny + j) * nz;
      if (j < ny - 1)
        for (int k = 0; k < nz - 1; ++k) {
          const std::int64_t id = base + k;
          hx[id] -= cb * ((ez[id + sy] - ez[id]) - (ey[id + 1] - ey[id]));
        }
      if (i < nx - 1)
        for (int k = 0; k < nz - 1; ++k) {
          const std::int64_t id = base + k;
          hy[id] -= cb * ((ex[id + 1] - ex[id]) - (ez[id + sx] - ez[id]));
        }
      if (i < nx - 1 && j < ny - 1)
        for (int k = 0; k < nz; ++k) {
          const std::int64_t id = base + k;
          hz[id] -= cb * ((ey[id + sx] - ey[id]) - (ex[id + sy] - ex[id]));
        }
    }

  const bool mur = s.boundary == OuterBoundary::Mur;
  if (mur) {
    for (std::size_t m = 0; m < s.mur_taps.size(); ++m) {
      const auto& t = s.mur_taps[m];
      const auto& f = field(s, t.component);
      s.mur_old[2 * m] = f[t.boundary];
      s.mur_old[2 * m + 1] = f[t.neighbor];
    }
  }

#pragma omp parallel for schedule(static)
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const std::int64_t base = (static_cast<std::int64_t>(i) * ny + j) * nz;
      const bool i_in = i >= 1 && i < nx - 1, j_in = j >= 1 && j < ny - 1;
      if (i < nx - 1 && j_in)
        for (int k = 1; k < nz - 1; ++k) {
          const std::int64_t id = base + k;
          ex[id] += ca * ((hz[id] - hz[id - sy]) - (hy[id] - hy[id - 1]));
        }
      if (i_in && j < ny - 1)
        for (int k = 1; k < nz - 1; ++k) {
          const std::int64_t id = base + k;
          ey[id] += ca * ((hx[id] - hx[id - 1]) - (hz[id] - hz[id - sx]));
        }
      if (i_in && j_in)
        for (int k = 0; k < nz - 1; ++k) {
          const std::int64_t id = base + k;
          ez[id] += ca * ((hy[id] - hy[id - sx]) - (hx[id] - hx[id - sy]));
        }
    }

  const double f = spec.pulse((s.step_index + 0.5) * s.dt);
  if (f != 0) {
    const double g = s.dt / s.eps * f;
    for (int c = 0; c < 3; ++c) {
      auto& e = field(s, c);
      for (const auto& w : s.source[c]) e[w.index] += g * w.weight;
    }
  }
  for (int c = 0; c < 3; ++c) {
    auto& e = field(s, c);
    for (auto id : s.pec[c]) e[id] = 0.0;
  }

  if (mur) {
    const double c = 1.0 / std::sqrt(s.eps * s.mu);
    const double k = (c * s.dt - s.h) / (c * s.dt + s.h);
    for (std::size_t m = 0; m < s.mur_taps.size(); ++m) {
      const auto& t = s.mur_taps[m];
      auto& e = field(s, t.component);
      e[t.boundary] = s.mur_old[2 * m + 1] + k * (e[t.neighbor] - s.mur_old[2 * m]);
    }
  }

  ++s.step_index;
  if (s.step_index % 16 == 0 && s.source_scale > 0) {
    double emax = 0;
    for (const auto* e : {&s.ex, &s.ey, &s.ez})
      for (double v : *e) emax = std::max(emax, std::abs(v));
    if (!(emax <= 1e12 * s.source_scale))
      throw Error(ErrorCode::NumericBlowup, kModule, "field magnitude exploded (cfl violation?)");
  }
}

Vec3 SimState::sample_E(const Vec3& x) const {
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    const Vec3 f = (x - origin) / h - kOffset[c];
    const Eigen::Vector3i lim(nx - 1 - (c == 0), ny - 1 - (c == 1), nz - 1 - (c == 2));
    Eigen::Vector3i i0;
    Vec3 u;
    for (int d = 0; d < 3; ++d) {
      i0[d] = std::clamp(static_cast<int>(std::floor(f[d])), 0, lim[d] - 1);
      u[d] = f[d] - i0[d];
    }
    const auto& e = field(*this, c);
    double v = 0;
    for (int o = 0; o < 8; ++o) {
      const int di = o & 1, dj = (o >> 1) & 1, dk = (o >> 2) & 1;
      const double w = (di ? u[0] : 1 - u[0]) * (dj ? u[1] : 1 - u[1]) * (dk ? u[2] : 1 - u[2]);
      v += w * e[index(i0[0] + di, i0[1] + dj, i0[2] + dk)];
    }
    out[c] = v;
  }
  return out;
}

double SimState::energy() const {
  double se = 0, sh = 0;
  for (const auto* e : {&ex, &ey, &ez})
    for (double v : *e) se += v * v;
  for (const auto* m : {&hx, &hy, &hz})
    for (double v : *m) sh += v * v;
  return 0.5 * h * h * h * (eps * se + mu * sh);
}

Recorder::Recorder(const SimState& s, const std::vector<Vec3>& points, const Vec3& a) {
  taps_.resize(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (int c = 0; c < 3; ++c) {
      if (a[c] == 0) continue;
      const Vec3 f = (points[p] - s.origin) / s.h - kOffset[c];
      const Eigen::Vector3i lim(s.nx - 1 - (c == 0), s.ny - 1 - (c == 1), s.nz - 1 - (c == 2));
      Eigen::Vector3i i0;
      Vec3 u;
      for (int d = 0; d < 3; ++d) {
        i0[d] = std::clamp(static_cast<int>(std::floor(f[d])), 0, lim[d] - 1);
        u[d] = f[d] - i0[d];
      }
      for (int o = 0; o < 8; ++o) {
        const int di = o & 1, dj = (o >> 1) & 1, dk = (o >> 2) & 1;
        const double w = (di ? u[0] : 1 - u[0]) * (dj ? u[1] : 1 - u[1]) * (dk ? u[2] : 1 - u[2]);
        if (w != 0) taps_[p].push_back({c, s.index(i0[0] + di, i0[1] + dj, i0[2] + dk), a[c] * w});
      }
    }
  }
}

void Recorder::record(const SimState& s, double* row) const {
  for (std::size_t p = 0; p < taps_.size(); ++p) {
    double v = 0;
    for (const auto& t : taps_[p]) v += t.weight * field(s, t.component)[t.index];
    row[p] = v;
  }
}

FieldRecord run(const Obstacle& obstacle, const SourceSpec& spec, const GridSpec& grid, const RunOptions& options) {
#ifdef _OPENMP
  omp_set_num_threads(configured_threads());
#endif
  const BallRule rule = ball_rule(spec.p, spec.eta, grid.record_n_r, grid.record_n_theta, grid.record_n_phi);
  FieldRecord rec;
  rec.spec = spec;
  rec.obstacle = obstacle.describe();
  rec.nodes = rule.nodes;
  rec.weights = rule.weights;
  rec.cfl = grid.cfl;

  auto simulate = [&](const Obstacle& obs) {
    SimState s = build_sim(obs, spec, grid);
    rec.h = s.h;
    rec.dt = s.dt;
    rec.steps = s.steps;
    rec.extent = {s.origin, s.node(s.nx - 1, s.ny - 1, s.nz - 1)};
    const Recorder recorder(s, rule.nodes, spec.a);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(s.steps + 1, rule.nodes.size());
    m.row(0).setZero();
    for (int n = 0; n < s.steps; ++n) {
      step(s, spec);
      recorder.record(s, m.row(n + 1).data());
      if (options.verbose && (n + 1) % 100 == 0)
        std::cerr << "  step " << (n + 1) << "/" << s.steps << "\n";
    }
    return m;
  };

  rec.samples = simulate(obstacle);
  if (options.with_reference) {
    if (obstacle.empty()) rec.reference = rec.samples;
    else rec.reference = simulate(Obstacle::none());
  }
  return rec;
}

}  // namespace enclosure
