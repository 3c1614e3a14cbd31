#include "enclosure/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <Eigen/Geometry>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace enclosure {
namespace {

constexpr const char* kModule = "cli";
namespace pt = boost::property_tree;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, kModule, msg); }

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"obstacle", {"kind", "center", "radius", "semiaxes", "axis", "angle_deg", "spheres"}},
      {"source", {"p", "eta", "a", "T", "gamma", "eps", "mu"}},
      {"pulse", {"kind", "omega", "cut", "off", "zero_net_charge", "degree", "t", "v", "file", "amplitude"}},
      {"grid",
       {"h", "dt", "cfl", "boundary", "allow_coarse", "margin", "extent_lo", "extent_hi", "record_n_r",
        "record_n_theta", "record_n_phi", "source_depth"}},
      {"tau", {"min", "max", "count", "spacing", "auto", "resolution", "truncation"}},
      {"pipeline",
       {"mode", "dispersion_matched", "use_reference", "normalization", "min_points", "trim_factor", "limit_sequence",
        "limit_order", "cauchy_tol", "seed"}},
      {"output", {"dir", "record", "record_csv"}},
      {"curvature", {"s1", "s2", "eta1", "eta2", "fdtd"}},
      {"reflection", {"samples", "h_fd", "taus", "residual_points", "residual_offsets"}},
      {"probe", {"s", "level", "tol"}},
  };
  return s;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(", \t"), boost::token_compress_on);
  std::vector<double> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (p.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(p, &used));
      if (used != p.size()) bad(key + ": not a number: " + p);
    } catch (const std::logic_error&) {
      bad(key + ": not a number: " + p);
    }
  }
  return out;
}

class Block {
 public:
  Block(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}
  bool present() const { return tree_ != nullptr; }

  std::string str(const std::string& key, const std::string& fallback) const {
    if (!tree_) return fallback;
    auto v = tree_->get_optional<std::string>(key);
    return v ? boost::trim_copy(*v) : fallback;
  }
  bool has(const std::string& key) const { return tree_ && tree_->get_optional<std::string>(key).has_value(); }

  double num(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto v = parse_list(str(key, ""), qualified(key));
    if (v.size() != 1) bad(qualified(key) + ": expected one number");
    return v[0];
  }
  double positive(const std::string& key, double fallback) const {
    const double v = num(key, fallback);
    if (!(v > 0) || !std::isfinite(v)) bad(qualified(key) + " must be positive");
    return v;
  }
  int integer(const std::string& key, int fallback) const {
    const double v = num(key, fallback);
    if (v != std::floor(v)) bad(qualified(key) + " must be an integer");
    return static_cast<int>(v);
  }
  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = boost::to_lower_copy(str(key, ""));
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    bad(qualified(key) + ": expected true or false");
  }
  Vec3 vec(const std::string& key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    const auto v = parse_list(str(key, ""), qualified(key));
    if (v.size() != 3) bad(qualified(key) + ": expected three numbers");
    return {v[0], v[1], v[2]};
  }
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? parse_list(str(key, ""), qualified(key)) : fallback;
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

Obstacle parse_obstacle(const Block& b) {
  const std::string kind = b.str("kind", "sphere");
  if (kind == "none") return Obstacle::none();
  if (kind == "sphere") return Obstacle::sphere(b.vec("center", Vec3::Zero()), b.positive("radius", 1.0));
  if (kind == "ellipsoid") {
    const Vec3 axis = b.vec("axis", Vec3::UnitZ());
    if (!(axis.norm() > 0)) bad("obstacle.axis must be nonzero");
    const double angle = b.num("angle_deg", 0.0) * std::numbers::pi / 180.0;
    const Mat3 frame = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
    const Vec3 e = b.vec("semiaxes", Vec3::Ones());
    if (!(e.minCoeff() > 0)) bad("obstacle.semiaxes must be positive");
    return Obstacle::ellipsoid(b.vec("center", Vec3::Zero()), e, frame);
  }
  if (kind == "sphere_union") {
    // spheres = x y z r; x y z r; ...
    std::vector<std::string> items;
    const std::string text = b.str("spheres", "");
    boost::split(items, text, boost::is_any_of(";"));
    std::vector<Sphere> spheres;
    for (const auto& item : items) {
      if (boost::trim_copy(item).empty()) continue;
      const auto v = parse_list(item, "obstacle.spheres");
      if (v.size() != 4 || !(v[3] > 0)) bad("obstacle.spheres: each entry is x y z r with r > 0");
      spheres.push_back({Vec3(v[0], v[1], v[2]), v[3]});
    }
    if (spheres.empty()) bad("obstacle.spheres is empty");
    try {
      return Obstacle::sphere_union(std::move(spheres));
    } catch (const Error& e) {
      bad(std::string("obstacle.spheres: ") + e.what());
    }
  }
  bad("obstacle.kind must be none, sphere, ellipsoid or sphere_union");
}

Pulse parse_pulse(const Block& b, const std::string& base_dir) {
  const std::string kind = b.str("kind", "ramped_sine");
  const double amplitude = b.num("amplitude", 1.0);
  if (kind == "ramped_sine") {
    RampedSine r;
    r.omega = b.positive("omega", r.omega);
    r.cut = b.positive("cut", r.cut);
    r.off = b.num("off", r.off);
    r.zero_net_charge = b.flag("zero_net_charge", r.zero_net_charge);
    return Pulse::ramped_sine(r, amplitude);
  }
  if (kind == "polynomial_ramp") {
    PolynomialRamp r;
    r.degree = b.integer("degree", r.degree);
    r.off = b.positive("off", r.off);
    if (r.degree < 1) bad("pulse.degree must be at least 1");
    return Pulse::polynomial_ramp(r, amplitude);
  }
  if (kind == "tabulated") {
    Tabulated t;
    if (b.has("file")) {
      std::filesystem::path path = b.str("file", "");
      if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
      std::ifstream in(path);
      if (!in) bad("pulse.file: cannot open " + path.string());
      std::string line;
      while (std::getline(in, line)) {
        boost::trim(line);
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        const auto v = parse_list(line, "pulse.file");
        if (v.size() != 2) bad("pulse.file: expected t,v per line");
        t.t.push_back(v[0]);
        t.v.push_back(v[1]);
      }
    } else {
      t.t = b.list("t", {});
      t.v = b.list("v", {});
    }
    try {
      return Pulse::tabulated(std::move(t), amplitude);
    } catch (const Error& e) {
      bad(std::string("pulse: ") + e.what());
    }
  }
  bad("pulse.kind must be ramped_sine, polynomial_ramp or tabulated");
}

}  // namespace

const char* to_string(Pipeline p) {
  switch (p) {
    case Pipeline::Fdtd: return "fdtd";
    case Pipeline::Semianalytic: return "semianalytic";
    case Pipeline::Both: return "both";
  }
  return "?";
}

ExperimentConfig parse_config(std::istream& in, const std::string& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    bad(std::string("malformed config: ") + e.what());
  }
  for (const auto& [name, block] : tree) {
    auto it = schema().find(name);
    if (it == schema().end()) {
      if (block.empty()) bad("key outside any block: " + name);
      bad("unknown block [" + name + "]");
    }
    for (const auto& [key, value] : block)
      if (!it->second.count(key)) bad("unknown key " + name + "." + key);
  }
  auto block = [&](const std::string& name) {
    auto child = tree.get_child_optional(name);
    return Block(child ? &*child : nullptr, name);
  };

  ExperimentConfig c;
  if (!block("obstacle").present()) bad("missing [obstacle] block");
  c.obstacle = parse_obstacle(block("obstacle"));

  const Block s = block("source");
  if (!s.has("p")) bad("source.p is required");
  c.source.p = s.vec("p", Vec3::Zero());
  c.source.eta = s.positive("eta", c.source.eta);
  c.source.a = s.vec("a", c.source.a);
  if (!(c.source.a.norm() > 0)) bad("source.a must be nonzero");
  c.source.a.normalize();
  c.source.T = s.positive("T", c.source.T);
  c.source.gamma = s.num("gamma", c.source.gamma);
  c.source.eps = s.positive("eps", c.source.eps);
  c.source.mu = s.positive("mu", c.source.mu);
  c.source.pulse = parse_pulse(block("pulse"), base_dir);

  const Block g = block("grid");
  c.grid.h = g.positive("h", c.grid.h);
  c.grid.dt = g.num("dt", 0.0);
  if (c.grid.dt < 0) bad("grid.dt must be positive (or 0 for automatic)");
  c.grid.cfl = g.positive("cfl", c.grid.cfl);
  const std::string boundary = g.str("boundary", "causal");
  if (boundary == "causal") c.grid.boundary = OuterBoundary::Causal;
  else if (boundary == "mur") c.grid.boundary = OuterBoundary::Mur;
  else bad("grid.boundary must be causal or mur");
  c.grid.allow_coarse = g.flag("allow_coarse", false);
  c.causal_margin = g.num("margin", c.causal_margin);
  if (g.has("extent_lo") != g.has("extent_hi")) bad("grid.extent_lo and grid.extent_hi go together");
  if (g.has("extent_lo")) c.grid.extent = Box{g.vec("extent_lo", Vec3::Zero()), g.vec("extent_hi", Vec3::Zero())};
  c.grid.record_n_r = g.integer("record_n_r", c.grid.record_n_r);
  c.grid.record_n_theta = g.integer("record_n_theta", c.grid.record_n_theta);
  c.grid.record_n_phi = g.integer("record_n_phi", c.grid.record_n_phi);
  c.grid.source_depth = g.integer("source_depth", c.grid.source_depth);
  if (c.grid.record_n_r < 1 || c.grid.record_n_theta < 1 || c.grid.record_n_phi < 1 || c.grid.source_depth < 0)
    bad("grid record and source resolutions must be positive");

  const Block t = block("tau");
  c.tau.min = t.positive("min", c.tau.min);
  c.tau.max = t.num("max", 0.0);
  if (c.tau.max < 0 || (c.tau.max > 0 && c.tau.max <= c.tau.min)) bad("tau.max must exceed tau.min");
  c.tau.count = t.integer("count", c.tau.count);
  if (c.tau.count < 2) bad("tau.count must be at least 2");
  const std::string spacing = t.str("spacing", "log");
  if (spacing == "log") c.tau.spacing = TauSpacing::Log;
  else if (spacing == "linear") c.tau.spacing = TauSpacing::Linear;
  else bad("tau.spacing must be log or linear");
  c.tau.automatic = t.flag("auto", true);
  c.tau.policy.resolution = t.positive("resolution", c.tau.policy.resolution);
  c.tau.policy.truncation = t.positive("truncation", c.tau.policy.truncation);

  const Block p = block("pipeline");
  const std::string mode = p.str("mode", "fdtd");
  if (mode == "fdtd") c.pipeline = Pipeline::Fdtd;
  else if (mode == "semianalytic") c.pipeline = Pipeline::Semianalytic;
  else if (mode == "both") c.pipeline = Pipeline::Both;
  else bad("pipeline.mode must be fdtd, semianalytic or both");
  c.indicator.dispersion_matched = p.flag("dispersion_matched", true);
  c.indicator.use_reference = p.flag("use_reference", true);
  const std::string norm = p.str("normalization", "kernel");
  if (norm == "kernel") c.distance.normalization = Normalization::Kernel;
  else if (norm == "pulse") c.distance.normalization = Normalization::Pulse;
  else if (norm == "none") c.distance.normalization = Normalization::None;
  else bad("pipeline.normalization must be kernel, pulse or none");
  c.distance.min_points = p.integer("min_points", c.distance.min_points);
  c.distance.trim_factor = p.positive("trim_factor", c.distance.trim_factor);
  const std::string seq = p.str("limit_sequence", "raw");
  if (seq == "raw") c.limit.sequence = LimitSequence::Raw;
  else if (seq == "kernel") c.limit.sequence = LimitSequence::Kernel;
  else bad("pipeline.limit_sequence must be raw or kernel");
  c.limit.order = p.integer("limit_order", c.limit.order);
  c.limit.cauchy_tol = p.positive("cauchy_tol", c.limit.cauchy_tol);
  const double seed = p.num("seed", 1.0);
  if (seed < 0 || seed != std::floor(seed)) bad("pipeline.seed must be a non-negative integer");
  c.seed = static_cast<std::uint64_t>(seed);

  const Block o = block("output");
  c.out_dir = o.str("dir", c.out_dir);
  c.write_record = o.flag("record", true);
  c.record_csv = o.flag("record_csv", false);

  const Block cv = block("curvature");
  if (cv.present()) {
    c.curvature.enabled = true;
    c.curvature.s1 = cv.positive("s1", c.curvature.s1);
    c.curvature.s2 = cv.positive("s2", c.curvature.s2);
    c.curvature.eta1 = cv.positive("eta1", c.curvature.eta1);
    c.curvature.eta2 = cv.positive("eta2", c.curvature.eta2);
    c.curvature.fdtd = cv.flag("fdtd", false);
  }
  const Block r = block("reflection");
  if (r.present()) {
    c.reflection.enabled = true;
    c.reflection.samples = r.integer("samples", c.reflection.samples);
    c.reflection.h_fd = r.num("h_fd", 0.0);
    c.reflection.taus = r.list("taus", c.reflection.taus);
    c.reflection.residual_points = r.integer("residual_points", c.reflection.residual_points);
    c.reflection.residual_offsets = r.list("residual_offsets", c.reflection.residual_offsets);
    if (c.reflection.samples < 1 || c.reflection.taus.empty()) bad("reflection needs samples and taus");
  }
  const Block pr = block("probe");
  if (pr.present()) {
    c.probe.enabled = true;
    c.probe.s = pr.num("s", c.probe.s);
    c.probe.level = pr.integer("level", c.probe.level);
    c.probe.tol = pr.positive("tol", c.probe.tol);
    if (!(c.probe.s > 0 && c.probe.s < 1)) bad("probe.s must lie in (0, 1)");
  }

  try {
    c.source.check();
  } catch (const Error& e) {
    bad(std::string("source: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, kModule, "cannot open config " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(in, dir.empty() ? "." : dir.string());
}

std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto v3 = [](const Vec3& v) {
    std::ostringstream s;
    s << std::setprecision(17) << v.x() << ", " << v.y() << ", " << v.z();
    return s.str();
  };
  auto list = [](const std::vector<double>& v) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
    return s.str();
  };
  auto tf = [](bool b) { return b ? "true" : "false"; };

  os << "[obstacle]\n";
  std::visit(
      [&](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, NoObstacle>) {
          os << "kind = none\n";
        } else if constexpr (std::is_same_v<T, Sphere>) {
          os << "kind = sphere\ncenter = " << v3(shape.center) << "\nradius = " << shape.radius << "\n";
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          const Eigen::AngleAxisd aa(shape.frame);
          os << "kind = ellipsoid\ncenter = " << v3(shape.center) << "\nsemiaxes = " << v3(shape.semiaxes)
             << "\naxis = " << v3(aa.axis()) << "\nangle_deg = " << aa.angle() * 180.0 / std::numbers::pi << "\n";
        } else {
          os << "kind = sphere_union\nspheres = ";
          for (std::size_t i = 0; i < shape.spheres.size(); ++i)
            os << (i ? "; " : "") << shape.spheres[i].center.x() << ' ' << shape.spheres[i].center.y() << ' '
               << shape.spheres[i].center.z() << ' ' << shape.spheres[i].radius;
          os << "\n";
        }
      },
      c.obstacle.shape());

  const auto& s = c.source;
  os << "\n[source]\np = " << v3(s.p) << "\neta = " << s.eta << "\na = " << v3(s.a) << "\nT = " << s.T
     << "\ngamma = " << s.gamma << "\neps = " << s.eps << "\nmu = " << s.mu << "\n";

  os << "\n[pulse]\n";
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, RampedSine>) {
          os << "kind = ramped_sine\nomega = " << k.omega << "\ncut = " << k.cut << "\noff = " << k.off
             << "\nzero_net_charge = " << tf(k.zero_net_charge) << "\n";
        } else if constexpr (std::is_same_v<T, PolynomialRamp>) {
          os << "kind = polynomial_ramp\ndegree = " << k.degree << "\noff = " << k.off << "\n";
        } else {
          os << "kind = tabulated\nt = " << list(k.t) << "\nv = " << list(k.v) << "\n";
        }
      },
      s.pulse.kind());
  os << "amplitude = " << s.pulse.amplitude() << "\n";

  const auto& g = c.grid;
  os << "\n[grid]\nh = " << g.h << "\ndt = " << g.dt << "\ncfl = " << g.cfl
     << "\nboundary = " << (g.boundary == OuterBoundary::Mur ? "mur" : "causal")
     << "\nallow_coarse = " << tf(g.allow_coarse) << "\nmargin = " << c.causal_margin << "\n";
  if (g.extent) os << "extent_lo = " << v3(g.extent->lo) << "\nextent_hi = " << v3(g.extent->hi) << "\n";
  os << "record_n_r = " << g.record_n_r << "\nrecord_n_theta = " << g.record_n_theta
     << "\nrecord_n_phi = " << g.record_n_phi << "\nsource_depth = " << g.source_depth << "\n";

  os << "\n[tau]\nmin = " << c.tau.min << "\nmax = " << c.tau.max << "\ncount = " << c.tau.count
     << "\nspacing = " << (c.tau.spacing == TauSpacing::Log ? "log" : "linear") << "\nauto = " << tf(c.tau.automatic)
     << "\nresolution = " << c.tau.policy.resolution << "\ntruncation = " << c.tau.policy.truncation << "\n";

  os << "\n[pipeline]\nmode = " << to_string(c.pipeline)
     << "\ndispersion_matched = " << tf(c.indicator.dispersion_matched)
     << "\nuse_reference = " << tf(c.indicator.use_reference)
     << "\nnormalization = " << to_string(c.distance.normalization) << "\nmin_points = " << c.distance.min_points
     << "\ntrim_factor = " << c.distance.trim_factor
     << "\nlimit_sequence = " << (c.limit.sequence == LimitSequence::Raw ? "raw" : "kernel")
     << "\nlimit_order = " << c.limit.order << "\ncauchy_tol = " << c.limit.cauchy_tol << "\nseed = " << c.seed
     << "\n";

  os << "\n[output]\ndir = " << c.out_dir << "\nrecord = " << tf(c.write_record)
     << "\nrecord_csv = " << tf(c.record_csv) << "\n";

  if (c.curvature.enabled)
    os << "\n[curvature]\ns1 = " << c.curvature.s1 << "\ns2 = " << c.curvature.s2 << "\neta1 = " << c.curvature.eta1
       << "\neta2 = " << c.curvature.eta2 << "\nfdtd = " << tf(c.curvature.fdtd) << "\n";
  if (c.reflection.enabled)
    os << "\n[reflection]\nsamples = " << c.reflection.samples << "\nh_fd = " << c.reflection.h_fd
       << "\ntaus = " << list(c.reflection.taus) << "\nresidual_points = " << c.reflection.residual_points
       << "\nresidual_offsets = " << list(c.reflection.residual_offsets) << "\n";
  if (c.probe.enabled)
    os << "\n[probe]\ns = " << c.probe.s << "\nlevel = " << c.probe.level << "\ntol = " << c.probe.tol << "\n";
  return os.str();
}

}  // namespace enclosure
