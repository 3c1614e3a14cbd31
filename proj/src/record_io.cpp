#include "enclosure/record_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace enclosure {
namespace {

constexpr const char* kModule = "fdtd";
constexpr char kMagic[8] = {'E', 'N', 'C', 'L', 'R', 'E', 'C', '1'};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorCode::IoError, kModule, "cannot open " + path + " for writing");
  }
  template <typename T>
  void put(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_doubles(const double* p, std::size_t n) { out_.write(reinterpret_cast<const char*>(p), sizeof(double) * n); }
  void put_vec(const Vec3& v) { put_doubles(v.data(), 3); }
  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void finish() {
    out_.flush();
    if (!out_) throw Error(ErrorCode::IoError, kModule, "write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::MissingArtifact, kModule, "cannot open record " + path);
  }
  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  void get_doubles(double* p, std::size_t n) {
    in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(sizeof(double) * n));
    check();
  }
  Vec3 get_vec() {
    Vec3 v;
    get_doubles(v.data(), 3);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint64_t>();
    if (n > (1u << 20)) throw Error(ErrorCode::IoError, kModule, "corrupt record string");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }

 private:
  void check() {
    if (!in_) throw Error(ErrorCode::IoError, kModule, "truncated record file");
  }
  std::ifstream in_;
};

void put_pulse(Writer& w, const Pulse& pulse) {
  w.put<double>(pulse.amplitude());
  if (const auto* rs = std::get_if<RampedSine>(&pulse.kind())) {
    w.put<std::int32_t>(0);
    w.put(rs->omega);
    w.put(rs->cut);
    w.put(rs->off);
    w.put<std::int32_t>(rs->zero_net_charge);
  } else if (const auto* pr = std::get_if<PolynomialRamp>(&pulse.kind())) {
    w.put<std::int32_t>(1);
    w.put<std::int32_t>(pr->degree);
    w.put(pr->off);
  } else {
    const auto& tab = std::get<Tabulated>(pulse.kind());
    w.put<std::int32_t>(2);
    w.put<std::uint64_t>(tab.t.size());
    w.put_doubles(tab.t.data(), tab.t.size());
    w.put_doubles(tab.v.data(), tab.v.size());
  }
}

Pulse get_pulse(Reader& r) {
  const double amplitude = r.get<double>();
  const auto kind = r.get<std::int32_t>();
  if (kind == 0) {
    RampedSine rs;
    rs.omega = r.get<double>();
    rs.cut = r.get<double>();
    rs.off = r.get<double>();
    rs.zero_net_charge = r.get<std::int32_t>() != 0;
    return Pulse::ramped_sine(rs, amplitude);
  }
  if (kind == 1) {
    PolynomialRamp pr;
    pr.degree = r.get<std::int32_t>();
    pr.off = r.get<double>();
    return Pulse::polynomial_ramp(pr, amplitude);
  }
  if (kind == 2) {
    const auto n = r.get<std::uint64_t>();
    Tabulated tab;
    tab.t.resize(n);
    tab.v.resize(n);
    r.get_doubles(tab.t.data(), n);
    r.get_doubles(tab.v.data(), n);
    return Pulse::tabulated(std::move(tab), amplitude);
  }
  throw Error(ErrorCode::IoError, kModule, "unknown pulse kind in record");
}

}  // namespace

void save_record(const std::string& path, const FieldRecord& rec) {
  Writer w(path);
  for (char c : kMagic) w.put(c);
  const auto& sp = rec.spec;
  w.put_vec(sp.p);
  w.put(sp.eta);
  w.put_vec(sp.a);
  w.put(sp.T);
  w.put(sp.gamma);
  w.put(sp.eps);
  w.put(sp.mu);
  put_pulse(w, sp.pulse);
  w.put_string(rec.obstacle);
  w.put(rec.h);
  w.put(rec.dt);
  w.put(rec.cfl);
  w.put_vec(rec.extent.lo);
  w.put_vec(rec.extent.hi);
  w.put<std::int32_t>(rec.steps);
  w.put<std::uint64_t>(rec.nodes.size());
  for (const auto& x : rec.nodes) w.put_vec(x);
  w.put_doubles(rec.weights.data(), rec.weights.size());
  w.put<std::uint64_t>(static_cast<std::uint64_t>(rec.samples.rows()));
  w.put_doubles(rec.samples.data(), static_cast<std::size_t>(rec.samples.size()));
  w.put<std::uint8_t>(rec.reference.has_value());
  if (rec.reference) w.put_doubles(rec.reference->data(), static_cast<std::size_t>(rec.reference->size()));
  w.finish();
}

FieldRecord load_record(const std::string& path) {
  Reader r(path);
  char magic[8];
  for (char& c : magic) c = r.get<char>();
  if (std::memcmp(magic, kMagic, 8) != 0) throw Error(ErrorCode::IoError, kModule, "not a field record: " + path);
  FieldRecord rec;
  auto& sp = rec.spec;
  sp.p = r.get_vec();
  sp.eta = r.get<double>();
  sp.a = r.get_vec();
  sp.T = r.get<double>();
  sp.gamma = r.get<double>();
  sp.eps = r.get<double>();
  sp.mu = r.get<double>();
  sp.pulse = get_pulse(r);
  rec.obstacle = r.get_string();
  rec.h = r.get<double>();
  rec.dt = r.get<double>();
  rec.cfl = r.get<double>();
  rec.extent.lo = r.get_vec();
  rec.extent.hi = r.get_vec();
  rec.steps = r.get<std::int32_t>();
  const auto n = r.get<std::uint64_t>();
  rec.nodes.resize(n);
  for (auto& x : rec.nodes) x = r.get_vec();
  rec.weights.resize(n);
  r.get_doubles(rec.weights.data(), n);
  const auto rows = r.get<std::uint64_t>();
  rec.samples.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  r.get_doubles(rec.samples.data(), rows * n);
  if (r.get<std::uint8_t>()) {
    rec.reference.emplace(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
    r.get_doubles(rec.reference->data(), rows * n);
  }
  return rec;
}

void export_record_csv(const std::string& path, const FieldRecord& rec) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, kModule, "cannot open " + path);
  out << "t,node_id,aE\n" << std::setprecision(17);
  for (Eigen::Index n = 0; n < rec.samples.rows(); ++n)
    for (Eigen::Index i = 0; i < rec.samples.cols(); ++i)
      out << n * rec.dt << ',' << i << ',' << rec.samples(n, i) << '\n';
}

}  // namespace enclosure
