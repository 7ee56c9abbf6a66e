#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hqc/dynamics.hpp"

namespace hqc {

inline constexpr std::string_view tool_version = "0.1.0";

// Malformed or inconsistent experiment configuration; the message carries the key path.
class ConfigError : public PreconditionError {
public:
  using PreconditionError::PreconditionError;
};

enum class Experiment { Gate1, Gate2, TwoQubit, Holonomy, Scan };

std::string_view experiment_name(Experiment e);

struct LoopConfig {
  std::optional<real> theta_max;
  std::optional<real> phi_sweep;
  Ramp ramp = Ramp::SmoothStep;
  std::size_t n_samples = 10000;
  std::optional<Orientation> orientation;
};

struct ScanConfig {
  Experiment base = Experiment::Gate1;
  std::string parameter;      // t_ad, omega, dt, phase_target or delta
  std::vector<real> values;   // internal units
};

// All quantities converted to internal units (fs, rad/fs, rad); delta stays in meV.
struct ExperimentConfig {
  Experiment gate = Experiment::Gate1;
  std::optional<real> phase_target;
  real omega = 0.0;
  std::optional<real> delta_meV;
  real t_ad = 0.0;
  std::optional<real> dt;
  std::optional<std::size_t> trace_stride;
  LoopConfig loop;
  GateKind holonomy_map = GateKind::Gate1;
  std::string initial_state_label;  // empty when amplitudes were given
  Vector initial_state;
  std::string output_dir = "hqc_output";
  std::optional<ScanConfig> scan;
};

// Strict JSON parsing: unknown keys, bad units and missing fields raise ConfigError.
//   omega:   "<x> rad/fs" | "<x> meV" | "<x> fs" (x is 1/Omega) | {"value", "unit"}
//   t_ad:    "<x> fs|ps|ns" or a number of fs
//   delta:   "<x> meV" or a number of meV
//   phase_target: radians, or "pi/4"-style strings
ExperimentConfig parse_config(std::string_view text);

// Parses a quantity for one of the unit-carrying fields (omega, t_ad, dt, delta,
// phase_target) into internal units.
real parse_quantity(std::string_view field, const nlohmann::json& value);

// Builds the loop the config describes.
LoopSchedule build_schedule(const ExperimentConfig& config);

// Fills dt and trace_stride from the schedule when absent.
ExperimentConfig resolve(const ExperimentConfig& config, const LoopSchedule& schedule);

nlohmann::ordered_json to_json(const ExperimentConfig& config);

struct ExperimentResult {
  ExperimentConfig resolved;
  GateRun run;
};

// Runs a gate experiment (gate1, gate2, twoqubit) without touching the filesystem.
ExperimentResult run_experiment(const ExperimentConfig& config);
nlohmann::ordered_json report_json(const ExperimentResult& result);

// Geometric computation only: Wilson line, numeric solid angle, extracted phase and
// the analytic prediction.
nlohmann::ordered_json holonomy_report(const ExperimentConfig& config);

// File-writing entry points. Exit codes: 0 success, 2 precondition or config
// violation, 1 internal error. Messages go to `err`.
int run(const ExperimentConfig& config, std::ostream& err);
int holonomy_only(const ExperimentConfig& config, std::ostream& err);
int scan(const ExperimentConfig& config, std::ostream& err);

// Exception-to-exit-code mapping shared by the CLI.
int exit_code_for(const std::exception& e);

}  // namespace hqc
