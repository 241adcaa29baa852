#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bridgelab/bridge.hpp"
#include "bridgelab/potential.hpp"

namespace bridgelab {

enum class ExperimentMode { Bridge, Flow, Gaussian, Verify, Sweep };

const char* mode_name(ExperimentMode m) noexcept;

struct PotentialSpec {
  PotentialKind kind = PotentialKind::QuadraticIsotropic;
  int dim = 1;
  /// Row-major d x d entries, QuadraticMatrix only.
  std::vector<double> matrix;

  Potential build() const;
};

struct ExperimentConfig {
  std::string name;
  ExperimentMode mode = ExperimentMode::Bridge;
  /// Absent only in gaussian mode, where the endpoints are the two means.
  std::optional<PotentialSpec> potential;
  Vector x;
  Vector y;
  std::vector<double> T_values;
  /// Fractions for the turnpike bound (verify) in (0, 1).
  std::vector<double> theta_values;
  /// Evaluation times as fractions of T for the pointwise bounds (verify).
  std::vector<double> time_fractions;
  /// Time at which sweep mode measures |X_t - S_t(x)|.
  double sweep_time = 1.0;
  SolverOptions solver;
  std::string csv_dir;
  std::string json_path;
};

/// Parses and validates a JSON config; throws Error(Config) with a message
/// naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);

/// Reads a config file, or a builtin when `path` has the form "builtin:NAME".
ExperimentConfig load_config(const std::string& path);

struct RunOptions {
  bool keep_going = false;
  /// Worker threads over T values; 0 picks the hardware concurrency.
  int threads = 0;
  /// Replaces outputs.csv_dir and the directory of outputs.json_path.
  std::optional<std::string> out_dir;
  /// Progress and failure messages; null silences them.
  std::ostream* log = nullptr;
};

struct RunResult {
  /// 0 success, 2 at least one solver failure.
  int exit_code = 0;
  int failures = 0;
  /// Bound reports that did not pass (verify mode).
  int bound_failures = 0;
  std::vector<std::string> files;
};

/// Runs a validated config and writes its artifacts. Solver failures stop the
/// run unless keep_going is set; either way they yield exit code 2.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

/// load_config + run_experiment with the exit-code contract: 1 for config or
/// I/O problems, 2 for solver failures, 0 otherwise.
int run_config(const std::string& path, const RunOptions& opts);

std::vector<std::string> builtin_config_names();
/// JSON text of a builtin config; throws Error(Config) for unknown names.
std::string builtin_config_json(const std::string& name);

}  // namespace bridgelab
