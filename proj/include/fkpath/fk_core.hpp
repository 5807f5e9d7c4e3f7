#ifndef FKPATH_FK_CORE_HPP
#define FKPATH_FK_CORE_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fkpath/measures.hpp"

namespace fkpath {

using Matrix = std::vector<std::vector<double>>;

/// Default cap on the number of atoms an exact enumeration may create.
inline constexpr std::size_t kDefaultOracleBudget = 10'000'000;

/**
 * Markov kernel on a finite state space E = {0, ..., |E|-1}.
 *
 * `transitions[t]` is the row-stochastic matrix used at time t + 1; the last
 * matrix is reused for all later times, so a single matrix gives a
 * time-homogeneous chain. On construction the kernel certifies the mixing
 * condition eps_n xi(j) <= Q_n(i, j) <= xi(j) / eps_n with the reference
 * measure xi(j) = sqrt(min_i Q(i, j) max_i Q(i, j)), which is the largest
 * eps achievable column by column.
 */
class MixingKernel {
 public:
  MixingKernel() = default;
  explicit MixingKernel(std::vector<Matrix> transitions);
  static MixingKernel homogeneous(Matrix transition) {
    return MixingKernel(std::vector<Matrix>{std::move(transition)});
  }

  std::size_t num_states() const noexcept { return num_states_; }

  /// Row Q_n(prev, .), n >= 1.
  std::span<const double> row(std::size_t n, State prev) const;
  /// Cumulative sums of row(n, prev), for sampling.
  std::span<const double> cumulative_row(std::size_t n, State prev) const;
  double prob(std::size_t n, State prev, State next) const { return row(n, prev)[next]; }

  double epsilon(std::size_t n) const;
  const std::vector<double>& reference(std::size_t n) const;

  /// Largest violation of the sandwich bound over n <= horizon and all
  /// singletons (zero or negative means the certificate holds).
  double mixing_violation(std::size_t horizon) const;

 private:
  std::size_t slot(std::size_t n) const;

  std::size_t num_states_ = 0;
  std::vector<Matrix> transitions_;
  std::vector<std::vector<double>> flat_;
  std::vector<std::vector<double>> cumulative_;
  std::vector<double> eps_;
  std::vector<std::vector<double>> reference_;
};

/**
 * Potential Psi_n(lambda_{0:n}) depending on the whole path, together with a
 * truncated version depending on the last p states only.
 *
 * Implementations with a recursive structure also expose a sufficient
 * statistic so particle systems can update weights in O(1) per step without
 * storing whole trajectories.
 */
class PathPotential {
 public:
  virtual ~PathPotential() = default;

  /// Psi_n on a path of length n + 1.
  virtual double eval(std::size_t n, std::span<const State> path) const = 0;

  /// Truncated potential on the segment lambda_{(n-p+1)^+:n} of length
  /// min(p, n + 1). Equals eval() when p > n.
  double truncated(std::size_t n, std::size_t p, std::span<const State> segment) const;

  /// Number of doubles in the recursive statistic; zero means the potential
  /// needs the whole path.
  virtual std::size_t stat_size() const { return 0; }

  /// Number of trailing states advance() reads; SIZE_MAX when the full path
  /// is needed.
  virtual std::size_t required_memory() const;

  virtual void init_stat(State first, std::span<double> stat) const;

  /// Updates `stat` from time n - 1 to time n and returns Psi_n. `tail` holds
  /// the retained trailing states, ending with lambda_n.
  virtual double advance(std::size_t n, std::span<const State> tail, std::span<double> stat) const;

 protected:
  /// Truncated potential for p <= n, segment of length p.
  virtual double truncated_impl(std::size_t n, std::size_t p,
                                std::span<const State> segment) const = 0;
};

/// Potential given by two callables, for hand-built test models.
class FunctionPotential final : public PathPotential {
 public:
  using Eval = std::function<double(std::size_t, std::span<const State>)>;
  using Truncated = std::function<double(std::size_t, std::size_t, std::span<const State>)>;

  /// Without a truncated callable, Psi~ pads the path prefix with state 0.
  explicit FunctionPotential(Eval eval, Truncated truncated = {})
      : eval_(std::move(eval)), truncated_(std::move(truncated)) {}

  double eval(std::size_t n, std::span<const State> path) const override { return eval_(n, path); }

 protected:
  double truncated_impl(std::size_t n, std::size_t p,
                        std::span<const State> segment) const override;

 private:
  Eval eval_;
  Truncated truncated_;
};

struct FKModel {
  DiscreteMeasure<State> zeta;
  MixingKernel kernel;
  std::shared_ptr<const PathPotential> potential;
  /// Smallest truncation depth for which the model declares the truncation
  /// hypothesis.
  std::size_t min_p = 1;

  std::size_t num_states() const { return kernel.num_states(); }
  void validate() const;
};

using PathMeasure = DiscreteMeasure<Path>;

/// Initial law lifted to length-1 paths.
PathMeasure initial_paths(const FKModel& model);

PathMeasure forward_gamma(const FKModel& model, std::size_t n, const PathMeasure& mu);
PathMeasure normalized_step(const FKModel& model, std::size_t n, const PathMeasure& mu);
PathMeasure project_last_p(const PathMeasure& mu, std::size_t p);
PathMeasure truncated_step(const FKModel& model, std::size_t n, std::size_t p,
                           const PathMeasure& mu);

PathMeasure exact_path_filter(const FKModel& model, std::size_t n,
                              std::size_t budget = kDefaultOracleBudget);
PathMeasure exact_truncated_filter(const FKModel& model, std::size_t n, std::size_t p,
                                   std::size_t budget = kDefaultOracleBudget);

/// Exact TV distance between the truncated flow started from R_k mu and the
/// one started from mu itself, both carried to time n. `mu` lives on paths
/// of length k.
double local_truncation_gap(const FKModel& model, std::size_t k, std::size_t n, std::size_t p,
                            const PathMeasure& mu, std::size_t budget = kDefaultOracleBudget);

/// Exact truncation gap ||R~_{1:n} zeta - H_n^p R_{1:n} zeta||.
double global_truncation_gap(const FKModel& model, std::size_t n, std::size_t p,
                             std::size_t budget = kDefaultOracleBudget);

/// Extremes of Psi_n and Psi~_n^p over all paths of length n + 1.
struct PotentialRange {
  double min = 0.0;
  double max = 0.0;
  /// max over paths of |Psi - Psi~| / min(Psi, Psi~).
  double max_relative_gap = 0.0;
};
PotentialRange potential_range(const FKModel& model, std::size_t n, std::size_t p,
                               std::size_t budget = kDefaultOracleBudget);

/// Law on E from per-state weights; uniform when `weights` is empty.
DiscreteMeasure<State> state_measure(std::span<const double> weights, std::size_t num_states);

/// Draws lambda_{0:horizon} from zeta and the kernel.
Path sample_chain(const DiscreteMeasure<State>& zeta, const MixingKernel& kernel,
                  std::size_t horizon, RandomSource& rng);

/// Enumerates all paths of the given length in lexicographic order.
std::vector<Path> enumerate_paths(std::size_t num_states, std::size_t length, std::size_t budget);

}  // namespace fkpath

#endif  // FKPATH_FK_CORE_HPP
