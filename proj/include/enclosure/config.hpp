#pragma once

#include "enclosure/fdtd.hpp"
#include "enclosure/geometry.hpp"
#include "enclosure/indicator.hpp"
#include "enclosure/source.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace enclosure {

enum class Pipeline { Fdtd, Semianalytic, Both };

const char* to_string(Pipeline p);

struct TauConfig {
  // With automatic set, [min, max] is the pilot range and the fit window comes from
  // stable_tau_window; otherwise [min, max] is used as given.
  double min = 1.0;
  double max = 0;  // 0: resolution limit of the grid (semianalytic: 40)
  int count = 24;
  TauSpacing spacing = TauSpacing::Log;
  bool automatic = true;
  WindowPolicy policy;
};

// Two extra sources on the segment from p to its first reflection point, at offsets s1 < s2.
struct CurvatureConfig {
  bool enabled = false;
  double s1 = 0.5, s2 = 1.0;
  double eta1 = 0.25, eta2 = 0.25;
  bool fdtd = false;  // also recover from FDTD limits (two more simulations)
};

struct ReflectionConfig {
  bool enabled = false;
  int samples = 500;
  double h_fd = 0;  // 0: default_fd_step
  std::vector<double> taus{10, 20, 40};
  int residual_points = 40;
  std::vector<double> residual_offsets{0, 0.05, 0.1, 0.2};
};

struct ProbeConfig {
  bool enabled = false;
  double s = 0.5;
  int level = 2;
  double tol = 1e-9;
};

struct ExperimentConfig {
  Obstacle obstacle = Obstacle::none();
  SourceSpec source;
  GridSpec grid;
  double causal_margin = 0.15;
  TauConfig tau;
  Pipeline pipeline = Pipeline::Fdtd;
  IndicatorOptions indicator{true, true};
  DistanceOptions distance;
  LimitOptions limit;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  bool write_record = true;
  bool record_csv = false;
  CurvatureConfig curvature;
  ReflectionConfig reflection;
  ProbeConfig probe;
};

// Blocks [obstacle] [source] [pulse] [grid] [tau] [pipeline] [output] [curvature] [reflection]
// [probe]; unknown blocks or keys are rejected with InvalidConfig. See docs/config.md.
ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

// Canonical text form of the resolved configuration (parses back to the same values).
std::string dump_config(const ExperimentConfig& config);

}  // namespace enclosure
