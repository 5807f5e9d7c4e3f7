#ifndef FKPATH_SMC_HPP
#define FKPATH_SMC_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fkpath/fk_core.hpp"
#include "fkpath/random.hpp"

namespace fkpath {

enum class ParticleMode { full_path, truncated };

inline constexpr std::size_t kUnlimitedMemory = std::numeric_limits<std::size_t>::max();

/**
 * N weighted particles approximating either the true filter (full-path mode)
 * or the truncated filter of depth p (truncated mode).
 *
 * Each particle retains its last `memory` states (the whole path while the
 * path is shorter than that) plus the potential's recursive statistic, which
 * is all a step needs. In truncated mode the retained segment always has
 * length min(p, time + 1).
 *
 * Every step does multinomial selection from the current normalised
 * weights, then one mutation draw per particle, then weighting. Both step
 * kinds consume the random stream identically, so a full and a truncated
 * system seeded alike draw the same ancestors and states.
 */
class ParticleSystem {
 public:
  /// Time-0 system: `count` i.i.d. draws from zeta with equal weights.
  ParticleSystem(const FKModel& model, std::size_t count, ParticleMode mode, std::size_t depth,
                 std::size_t memory, RandomSource rng);

  std::size_t size() const noexcept { return count_; }
  std::size_t time() const noexcept { return time_; }
  ParticleMode mode() const noexcept { return mode_; }
  /// Truncation depth in truncated mode.
  std::size_t depth() const noexcept { return depth_; }
  /// Number of states currently retained per particle.
  std::size_t width() const noexcept { return width_; }

  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const State> states(std::size_t i) const {
    return {states_.data() + i * width_, width_};
  }
  std::span<const double> stat(std::size_t i) const {
    return {stats_.data() + i * stat_size_, stat_size_};
  }
  RandomSource& rng() noexcept { return rng_; }

  /// Weighted empirical measure of the last min(p, time + 1) states.
  PathMeasure projected(std::size_t p) const;
  /// Weighted empirical measure over full paths; needs unlimited memory.
  PathMeasure path_measure() const;

 private:
  friend struct StepAccess;

  std::size_t count_ = 0;
  std::size_t time_ = 0;
  ParticleMode mode_ = ParticleMode::full_path;
  std::size_t depth_ = 0;
  std::size_t memory_ = kUnlimitedMemory;
  std::size_t width_ = 0;
  std::size_t stat_size_ = 0;
  std::size_t num_states_ = 0;
  std::vector<State> states_;
  std::vector<double> stats_;
  std::vector<double> weights_;
  RandomSource rng_;
  bool fresh_ = true;
};

/// One step of the true-filter particle approximation: select, extend by
/// Q_n, weight by Psi_n.
ParticleSystem particle_step(const FKModel& model, ParticleSystem system);

/// Same cycle on segments with the segment-shift kernel and Psi~_n^p.
ParticleSystem truncated_particle_step(const FKModel& model, ParticleSystem system, std::size_t p);

struct CouplingDiagnostics {
  std::size_t time = 0;
  /// 1/2 sum_i |w_i / sum w - wbar_i / sum wbar| over the shared draws.
  double weight_discrepancy = 0.0;
  /// Supremum over indicator test functions of the projected measures'
  /// difference; equals half their TV distance, and never exceeds
  /// weight_discrepancy.
  double projected_discrepancy = 0.0;
  /// phi_k tau^p when supplied by the caller.
  std::optional<double> bound;
};

struct CoupledStepResult {
  ParticleSystem full;
  /// H_k^p of the Psi_k-weighted draws.
  PathMeasure projected_view;
  /// H_k^p of the Psi~_k^p-weighted draws.
  PathMeasure truncated_view;
  CouplingDiagnostics diagnostics;
};

/// Draws the mutated particles once and weights them by both the true and
/// the truncated potential.
CoupledStepResult coupled_step(const FKModel& model, ParticleSystem full, std::size_t p,
                               std::optional<double> bound = std::nullopt);

struct RunOptions {
  /// Full-path mode keeps whole trajectories while horizon + 1 <= path_cap,
  /// otherwise only the last max(p, potential lag) states.
  std::size_t path_cap = 64;
};

/// Runs `horizon` steps from zeta and returns the H_k^p-projected weighted
/// measure for k = 0, ..., horizon.
std::vector<PathMeasure> run_filter(const FKModel& model, std::size_t horizon, std::size_t count,
                                    ParticleMode mode, std::size_t p, RandomSource rng,
                                    const RunOptions& options = {});

/// Memory a full-path system needs to project on depth p over `horizon`.
std::size_t full_path_memory(const FKModel& model, std::size_t horizon, std::size_t p,
                             const RunOptions& options = {});

}  // namespace fkpath

#endif  // FKPATH_SMC_HPP
