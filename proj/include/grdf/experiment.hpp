#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grdf/environment.hpp"
#include "json.hpp"

namespace grdf {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "probe-env",      "simulate-path",      "renewals",    "coalescence-tail", "crossings",
      "constants",      "distance-preserved", "condition-b", "condition-e",      "condition-t",
      "eta",            "metric-distance",    "moment-stability", "overshoot"};
  return names;
}

/// Everything one experiment run depends on. `geometry` holds the
/// experiment-specific parameters (m, a, b, t0, t, rho, grids, ...).
struct ExperimentConfig {
  std::string experiment;
  EnvConfig env;
  std::int64_t trials = 1000;
  std::int64_t horizon = 100'000;
  long n = 100;
  int workers = 1;
  std::string out_prefix = "grdf_out";
  nlohmann::json geometry = nlohmann::json::object();

  /// Throws ConfigError naming the offending field.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct ExperimentOutput {
  std::string csv;
  nlohmann::ordered_json summary;
};

/// Runs the experiment in memory. Output is a function of the config alone;
/// `workers` only changes the wall time.
ExperimentOutput execute(const ExperimentConfig& config);

/// Exit codes of `run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInsufficientData = 3;
inline constexpr int kExitFailure = 1;

/// Executes and writes <out_prefix>.csv and <out_prefix>.summary.json.
/// Errors are reported on `err` and mapped to the exit codes above.
int run(const ExperimentConfig& config, std::ostream& err);

/// Formats a double with the shortest representation that round-trips.
std::string format_number(double v);

}  // namespace grdf
