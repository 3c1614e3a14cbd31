#pragma once

#include "enclosure/analysis.hpp"
#include "enclosure/config.hpp"
#include "enclosure/fdtd.hpp"
#include "enclosure/indicator.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace enclosure {

enum class Stage { All, Simulate, Indicator, Extract, Oracle, ReflectCheck, Probe };

Stage parse_stage(const std::string& name);
const char* to_string(Stage s);

// The fit window actually used, with the pilot fit that chose it.
struct WindowReport {
  double pilot_lo = 0, pilot_hi = 0;
  double pilot_dist = 0;
  TauWindow window;
  bool automatic = false;
  bool fallback = false;  // the policy window was empty; the top half of the pilot range was used
};

// Grid actually simulated: the configured grid with the causal box filled in.
GridSpec resolved_grid(const ExperimentConfig& config);

// Indicator of a record on the configured tau range. With automatic windows, a pilot fit over
// [tau.min, resolution limit] picks the window and the series is recomputed on it.
IndicatorSeries fdtd_indicator(const FieldRecord& record, const ExperimentConfig& config,
                               WindowReport* report = nullptr);

// Default tau range of the semianalytic pipeline: tau~ dist(D, B) in [4, 40].
std::vector<double> semianalytic_taus(const ExperimentConfig& config);

// Second-order sequence tau^2 e^{2 tau~ dist} I / f~^2 at each point.
std::vector<double> normalized_sequence(const IndicatorSeries& series, const SourceSpec& spec, double dist);

struct CurvatureRow {
  std::string source;  // "oracle", "semianalytic" or "fdtd"
  double R1 = 0, R2 = 0;
  RecoveryResult result;
  double K_true = 0, H_true = 0;
};

// The two curvature sources lie on the segment from p to its (single) first reflection point.
std::vector<SourceSpec> curvature_sources(const ExperimentConfig& config, Vec3* q = nullptr, Vec3* nu = nullptr);

struct StageFailure {
  std::string stage;
  ErrorCode code;
  std::string module;
  std::string message;
};

struct ExperimentResult {
  std::vector<std::string> artifacts;
  std::vector<StageFailure> failures;  // non-fatal failures of optional steps
};

// Runs one stage (or all) and writes artifacts to config.out_dir. Fatal errors throw Error.
ExperimentResult run_experiment(const ExperimentConfig& config, Stage stage, std::ostream& log);

// Machine-readable error block written on failure.
std::string error_block(const std::string& stage, ErrorCode code, const std::string& module, const std::string& message);

}  // namespace enclosure
