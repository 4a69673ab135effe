#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bosenet/evolve.hpp"
#include "bosenet/metrics.hpp"

namespace bosenet {

using nlohmann::json;

enum ExitCode : int {
  kSuccess = 0,
  kValidation = 2,
  kSynthesis = 3,
  kIntegration = 4,
  kAcceptance = 5,
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ScheduleConfig {
  std::string builder;  // explicit | noon_chiral | fock_chiral
  int N = 2;
  int loops = 1;
  double tau = 1.0;
  std::string direction = "ccw";
  std::string variant = "three_node";
  double f_multiplier = 3.0;
  // explicit
  ScheduleSpec spec;
  std::vector<double> boundaries;
  double t_end = 1.0;
};

struct SynthesisConfig {
  std::string method;  // two_mode | two_mode_phase | three_mode | four_mode
  double alpha0 = 0.0;
  std::string rate_form = "first_derivative";
  double omega1 = 0.0, omega2 = 0.0, omega0 = 0.0;
  bool phase_convention = true;
  double phase_value = 1.5707963267948966;
  std::vector<double> phase_constants;
};

struct BasisConfig {
  std::string kind = "sector";  // sector | cutoff
  int n = 0;
  std::vector<int> cutoffs;
};

// Single-mode factor of a product state.
struct FactorConfig {
  std::string kind;  // fock | coherent | cat | thermal
  int n = 0;
  cd alpha = 0.0;
  double nbar = 0.0;
};

struct StateConfig {
  std::string kind;  // fock | noon | product
  Occupation occupation;
  std::vector<int> modes;  // noon, 1-based
  int n = 0;
  std::vector<FactorConfig> factors;
};

struct ObservableConfig {
  std::string label;
  std::string kind;  // fidelity | overlap | population | noon_fidelity
  StateConfig target;
  Occupation occupation;
  std::vector<int> modes;
  int n = 0;
};

struct CheckConfig {
  std::string label;
  std::string kind;  // value | peaks | repeat | residual | oracle
  std::string observable;
  double t = 0.0;
  std::optional<double> min, max, target;
  double tol = 0.0;
  double t0 = 0.0, t1 = 0.0;
  int count = 0;
  double period = 0.0;
};

struct GridConfig {
  int points_per_stage = 100;
  int steps_per_stage = 2000;
  double tolerance = 1e-9;
  int max_refinements = 4;
  std::vector<double> extra_times;
  std::optional<double> t_stop;  // evolve only up to this time
};

struct VerifyConfig {
  int points_per_stage = 200;
  double residual_tol = 1e-10;
  int pulse_samples_per_stage = 1000;
};

struct ExperimentConfig {
  std::string name;
  std::string description;
  ScheduleConfig schedule;
  SynthesisConfig synthesis;
  BasisConfig basis;
  StateConfig initial;
  std::vector<ObservableConfig> observables;
  std::vector<CheckConfig> checks;
  GridConfig grid;
  VerifyConfig verify;
  int threads = 1;
};

ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& c);

std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);
// Explicit JSON for a catalog preset; throws ConfigError for unknown names.
json preset_json(const std::string& name);

// Loads --config or --preset, then applies command-line overrides.
struct Overrides {
  std::optional<int> loops;
  std::optional<int> steps_per_stage;
  std::optional<double> tolerance;
  std::optional<int> threads;
};
json apply_overrides(json j, const Overrides& o);

Schedule build_schedule(const ExperimentConfig& c);
LabControls synthesize(const ExperimentConfig& c, const Schedule& s);

struct RunResult {
  int exit_code = kSuccess;
  std::string message;
  json summary;
};

// Full pipeline: synthesis, verification, evolution, observables, checks.
RunResult run_experiment(const ExperimentConfig& c, const std::filesystem::path& out);
// Synthesis and verification only (pulses.json and residuals.json).
RunResult verify_experiment(const ExperimentConfig& c, const std::filesystem::path& out);
// Replays tabulated controls from a pulses.json file against the configured frame.
RunResult verify_pulses(const ExperimentConfig& c, const std::filesystem::path& pulses,
                        const std::filesystem::path& out);

// One run per value of the JSON pointer `parameter`; writes index.json.
RunResult sweep(const json& config, const std::string& parameter, const json& values,
                const std::filesystem::path& out, int threads);

// Output directory and thread count honour BOSENET_OUT and BOSENET_THREADS.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag,
                                      const std::string& fallback);
int resolve_threads(const std::optional<int>& flag, int fallback);

// Parsed artifacts, used by replay and tests.
json pulses_json(const LabControls& lc, const std::vector<double>& times);
std::pair<std::vector<double>, std::vector<ControlSample>> read_pulses(const json& j);

}  // namespace bosenet
