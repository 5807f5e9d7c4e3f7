#ifndef FKPATH_CONFIG_HPP
#define FKPATH_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fkpath/fk_core.hpp"
#include "fkpath/garch.hpp"
#include "fkpath/kalman.hpp"
#include "fkpath/logistic.hpp"

namespace fkpath {

enum class Scenario {
  convergence_in_N,
  uniform_in_time,
  coupling_check,
  bound_vs_empirical,
  truncation_gap,
};

const char* to_string(Scenario s);

/// Constants that replace the model's own when resolving "auto" depths.
struct CorollaryOverride {
  double c = 1.0;
  double phi = 1.0;
  double tau = 0.5;
  double eps = 1.0;
};

struct ModelConfig {
  /// garch_beta0 | garch_general | mixture_kalman | logistic_ar
  std::string type;
  std::variant<GarchSpec, KalmanSpec, LogisticSpec> spec;
};

struct ExperimentConfig {
  ModelConfig model;
  Scenario scenario = Scenario::truncation_gap;
  std::size_t horizon = 1;
  std::vector<std::size_t> particles;
  /// Explicit depths; empty when "auto".
  std::vector<std::size_t> depths;
  bool auto_p = false;
  /// Resolved depth for each entry of `particles` when auto_p.
  std::vector<std::size_t> auto_depths;
  std::size_t replications = 1;
  std::uint64_t seed = 1;
  std::string output;
  /// One observation per line for y_1, y_2, ...; simulated when empty.
  std::string observations_file;
  std::optional<CorollaryOverride> corollary;
  std::size_t path_cap = 64;
  std::size_t oracle_budget = kDefaultOracleBudget;
  std::size_t threads = 0;

  /// (N, p) pairs in emission order.
  std::vector<std::pair<std::size_t, std::size_t>> grid() const;
};

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  /// One entry per violation, each prefixed by its key path.
  std::vector<std::string> diagnostics;
  bool ok() const { return config.has_value() && diagnostics.empty(); }
};

/// Parses and validates a JSON config. `budget_override` stands in for the
/// FKPATH_ORACLE_BUDGET environment variable.
ConfigResult validate_config(const std::string& text,
                             std::optional<std::size_t> budget_override = std::nullopt);

/// Reads a file and validates it; a missing file is a diagnostic.
ConfigResult load_config(const std::string& path);

/// Value of FKPATH_ORACLE_BUDGET when set to a positive integer.
std::optional<std::size_t> oracle_budget_from_env();

/// Human-readable echo of a validated config, including resolved depths.
std::string describe_config(const ExperimentConfig& config);

}  // namespace fkpath

#endif  // FKPATH_CONFIG_HPP
