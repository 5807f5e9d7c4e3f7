#ifndef FKPATH_EXPERIMENT_HPP
#define FKPATH_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fkpath/bounds.hpp"
#include "fkpath/config.hpp"
#include "fkpath/fk_core.hpp"

namespace fkpath {

inline constexpr const char* kCsvHeader = "scenario,model,n,N,p,rep,metric,value,bound,seed";

struct ResultRow {
  std::string scenario;
  std::string model;
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t p = 0;
  std::size_t rep = 0;
  std::string metric;
  double value = 0.0;
  std::optional<double> bound;
  std::uint64_t seed = 0;
  /// Deterministic check: value must not exceed bound.
  bool gated = false;
};

/// Constants entering the time-uniform corollary for one depth.
struct ExpectedConstants {
  double c = 0.0;
  double phi = 0.0;
  double tau = 0.0;
  double eps = 1.0;
  bool stable = false;
  std::optional<bool> ratio_feasible;
  std::vector<std::string> notes;
};

/// A configured model bound to its observations.
struct ModelInstance {
  std::string name;
  FKModel model;
  std::vector<double> y;
  /// Per-step hypothesis constants at truncation depth p.
  std::function<HypothesisConstants(std::size_t)> constants;
  std::function<ExpectedConstants(std::size_t)> expected;
  /// Set for logistic_ar, which adds the X-filtering decomposition.
  std::optional<LogisticSpec> logistic;
  std::vector<std::string> notes;
};

/// y[0] = 0 followed by y_1..y_horizon, read from the observations file or
/// simulated from stream 0 of the config seed.
std::vector<double> observations_for(const ExperimentConfig& config,
                                     std::vector<std::string>* notes = nullptr);

ModelInstance build_instance(const ExperimentConfig& config);

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::string summary;
  std::size_t violations = 0;
  int exit_code = 0;
};

/// Runs every (N, p, replication) of the config; rows come out in
/// (N, p, rep) order whatever the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string format_csv(const std::vector<ResultRow>& rows);

/// Least-squares slope of ys against xs.
double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

BoundReport bound_report(const ExperimentConfig& config, const ModelInstance& instance,
                         std::size_t N, std::size_t p);
std::string format_bound_report(const BoundReport& report, std::size_t N, std::size_t p);

}  // namespace fkpath

#endif  // FKPATH_EXPERIMENT_HPP
