#include "fkpath/smc.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fkpath {

ParticleSystem::ParticleSystem(const FKModel& model, std::size_t count, ParticleMode mode,
                               std::size_t depth, std::size_t memory, RandomSource rng)
    : count_(count),
      mode_(mode),
      depth_(depth),
      memory_(memory),
      stat_size_(model.potential ? model.potential->stat_size() : 0),
      num_states_(model.num_states()),
      rng_(std::move(rng)) {
  model.validate();
  if (count == 0) throw FkError(ErrorKind::invalid_argument, "particle count must be positive");
  if (memory == 0) throw FkError(ErrorKind::invalid_argument, "memory must be positive");
  if (mode == ParticleMode::truncated) {
    if (depth == 0) throw FkError(ErrorKind::invalid_argument, "truncation depth must be positive");
    memory_ = depth;
    stat_size_ = 0;
  }
  width_ = 1;
  states_.resize(count_);
  stats_.resize(count_ * stat_size_);
  weights_.assign(count_, 1.0);
  std::vector<double> cumulative;
  double running = 0.0;
  for (double w : model.zeta.weights()) cumulative.push_back(running += w);
  for (std::size_t i = 0; i < count_; ++i) {
    states_[i] = model.zeta.atom(rng_.categorical(cumulative));
    if (stat_size_ > 0) {
      model.potential->init_stat(states_[i], {stats_.data() + i * stat_size_, stat_size_});
    }
  }
}

PathMeasure ParticleSystem::projected(std::size_t p) const {
  if (p == 0) throw FkError(ErrorKind::invalid_argument, "projection depth must be positive");
  const std::size_t keep = std::min(p, time_ + 1);
  if (keep > width_) {
    throw FkError(ErrorKind::dimension, "particles retain fewer states than the projection needs");
  }
  double total = 0.0;
  for (double w : weights_) total += w;
  if (!(total > 0.0)) throw FkError(ErrorKind::degenerate_particle_system, "zero total weight");

  // Small segment spaces accumulate densely by base-|E| code; the code order
  // is the lexicographic order, so atoms come out sorted.
  double cells = 1.0;
  for (std::size_t i = 0; i < keep; ++i) cells *= static_cast<double>(num_states_);
  if (cells <= static_cast<double>(1u << 20)) {
    std::vector<double> dense(static_cast<std::size_t>(cells), 0.0);
    for (std::size_t i = 0; i < count_; ++i) {
      const auto s = states(i).subspan(width_ - keep);
      std::size_t code = 0;
      for (State x : s) code = code * num_states_ + static_cast<std::size_t>(x);
      dense[code] += weights_[i] / total;
    }
    std::vector<Path> atoms;
    std::vector<double> weights;
    for (std::size_t code = 0; code < dense.size(); ++code) {
      if (dense[code] == 0.0) continue;
      Path seg(keep);
      std::size_t rest = code;
      for (std::size_t j = keep; j-- > 0;) {
        seg[j] = static_cast<State>(rest % num_states_);
        rest /= num_states_;
      }
      atoms.push_back(std::move(seg));
      weights.push_back(dense[code]);
    }
    return PathMeasure(std::move(atoms), std::move(weights));
  }
  std::map<Path, double> acc;
  for (std::size_t i = 0; i < count_; ++i) {
    const auto s = states(i).subspan(width_ - keep);
    acc[Path(s.begin(), s.end())] += weights_[i] / total;
  }
  std::vector<Path> atoms;
  std::vector<double> weights;
  for (auto& [a, w] : acc) {
    atoms.push_back(a);
    weights.push_back(w);
  }
  return PathMeasure(std::move(atoms), std::move(weights));
}

PathMeasure ParticleSystem::path_measure() const {
  if (width_ != time_ + 1) {
    throw FkError(ErrorKind::dimension, "particles do not retain full paths");
  }
  return projected(time_ + 1);
}

struct StepAccess {
  /// Selection and mutation shared by every step kind. Afterwards each
  /// particle holds its extended retained states and ancestor's statistic;
  /// weights are left for the caller.
  static void select_and_mutate(const FKModel& model, ParticleSystem& sys) {
    const std::size_t n = sys.time_ + 1;
    std::vector<std::size_t> ancestors;
    if (sys.fresh_) {
      // The time-0 particles are already i.i.d. draws from zeta.
      ancestors.resize(sys.count_);
      for (std::size_t i = 0; i < sys.count_; ++i) ancestors[i] = i;
    } else {
      double total = 0.0;
      for (double w : sys.weights_) total += w;
      if (!(total > 0.0) || !std::isfinite(total)) {
        throw FkError(ErrorKind::degenerate_particle_system, "zero total weight");
      }
      ancestors = sample_indices(sys.weights_, sys.count_, sys.rng_);
    }

    const std::size_t new_width = std::min(sys.memory_, n + 1);
    const std::size_t carried = new_width - 1;
    std::vector<State> states(sys.count_ * new_width);
    std::vector<double> stats(sys.count_ * sys.stat_size_);
    for (std::size_t i = 0; i < sys.count_; ++i) {
      const std::size_t a = ancestors[i];
      const State* src = sys.states_.data() + a * sys.width_;
      State* dst = states.data() + i * new_width;
      std::copy(src + (sys.width_ - carried), src + sys.width_, dst);
      const auto cum = model.kernel.cumulative_row(n, src[sys.width_ - 1]);
      dst[carried] = static_cast<State>(sys.rng_.categorical(cum));
      std::copy_n(sys.stats_.data() + a * sys.stat_size_, sys.stat_size_,
                  stats.data() + i * sys.stat_size_);
    }
    sys.states_ = std::move(states);
    sys.stats_ = std::move(stats);
    sys.width_ = new_width;
    sys.time_ = n;
    sys.fresh_ = false;
  }

  static void weight_full(const FKModel& model, ParticleSystem& sys) {
    for (std::size_t i = 0; i < sys.count_; ++i) {
      sys.weights_[i] = model.potential->advance(
          sys.time_, sys.states(i), {sys.stats_.data() + i * sys.stat_size_, sys.stat_size_});
    }
    check_weights(sys);
  }

  static void weight_truncated(const FKModel& model, ParticleSystem& sys, std::size_t p) {
    for (std::size_t i = 0; i < sys.count_; ++i) {
      sys.weights_[i] = model.potential->truncated(sys.time_, p, sys.states(i));
    }
    check_weights(sys);
  }

  static void check_weights(const ParticleSystem& sys) {
    double total = 0.0;
    for (double w : sys.weights_) total += w;
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw FkError(ErrorKind::degenerate_particle_system,
                    "weights sum to " + std::to_string(total) + " at time " +
                        std::to_string(sys.time_));
    }
  }
};

ParticleSystem particle_step(const FKModel& model, ParticleSystem system) {
  if (system.mode() != ParticleMode::full_path) {
    throw FkError(ErrorKind::invalid_argument, "particle_step needs a full-path system");
  }
  StepAccess::select_and_mutate(model, system);
  StepAccess::weight_full(model, system);
  return system;
}

ParticleSystem truncated_particle_step(const FKModel& model, ParticleSystem system, std::size_t p) {
  if (system.mode() != ParticleMode::truncated || system.depth() != p) {
    throw FkError(ErrorKind::invalid_argument, "truncated_particle_step needs a truncated(p) system");
  }
  if (p <= system.time() && p < model.min_p) {
    throw FkError(ErrorKind::invalid_argument, "truncation depth below the model's min_p");
  }
  StepAccess::select_and_mutate(model, system);
  StepAccess::weight_truncated(model, system, p);
  return system;
}

CoupledStepResult coupled_step(const FKModel& model, ParticleSystem full, std::size_t p,
                               std::optional<double> bound) {
  if (full.mode() != ParticleMode::full_path) {
    throw FkError(ErrorKind::invalid_argument, "coupled_step needs a full-path system");
  }
  StepAccess::select_and_mutate(model, full);
  const std::size_t k = full.time();
  const std::size_t keep = std::min(p, k + 1);
  if (full.width() < keep) {
    throw FkError(ErrorKind::dimension, "particles retain fewer states than the coupling needs");
  }
  std::vector<double> truncated_weights(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    truncated_weights[i] = model.potential->truncated(k, p, full.states(i).subspan(full.width() - keep));
  }
  StepAccess::weight_full(model, full);

  double sum_true = 0.0;
  double sum_trunc = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    sum_true += full.weights()[i];
    sum_trunc += truncated_weights[i];
  }
  if (!(sum_trunc > 0.0)) throw FkError(ErrorKind::degenerate_particle_system, "truncated weights");

  CouplingDiagnostics diag;
  diag.time = k;
  diag.bound = bound;
  double l1 = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    l1 += std::abs(full.weights()[i] / sum_true - truncated_weights[i] / sum_trunc);
  }
  diag.weight_discrepancy = 0.5 * l1;

  PathMeasure projected_view = full.projected(p);
  std::vector<Path> atoms;
  std::vector<double> weights;
  atoms.reserve(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto s = full.states(i).subspan(full.width() - keep);
    atoms.emplace_back(s.begin(), s.end());
    weights.push_back(truncated_weights[i] / sum_trunc);
  }
  PathMeasure truncated_view = PathMeasure::aggregate(std::move(atoms), std::move(weights));
  diag.projected_discrepancy = 0.5 * tv_distance(projected_view, truncated_view);

  return CoupledStepResult{std::move(full), std::move(projected_view), std::move(truncated_view),
                           diag};
}

std::size_t full_path_memory(const FKModel& model, std::size_t horizon, std::size_t p,
                             const RunOptions& options) {
  if (horizon + 1 <= options.path_cap) return kUnlimitedMemory;
  const std::size_t lag = model.potential->required_memory();
  if (lag == kUnlimitedMemory) {
    throw FkError(ErrorKind::invalid_argument,
                  "potential needs whole paths but the horizon exceeds the path cap");
  }
  return std::max({p, lag, std::size_t{1}});
}

std::vector<PathMeasure> run_filter(const FKModel& model, std::size_t horizon, std::size_t count,
                                    ParticleMode mode, std::size_t p, RandomSource rng,
                                    const RunOptions& options) {
  if (p == 0) throw FkError(ErrorKind::invalid_argument, "projection depth must be positive");
  const std::size_t memory =
      mode == ParticleMode::truncated ? p : full_path_memory(model, horizon, p, options);
  ParticleSystem system(model, count, mode, p, memory, std::move(rng));
  std::vector<PathMeasure> out;
  out.reserve(horizon + 1);
  out.push_back(system.projected(p));
  for (std::size_t k = 1; k <= horizon; ++k) {
    system = mode == ParticleMode::truncated ? truncated_particle_step(model, std::move(system), p)
                                             : particle_step(model, std::move(system));
    out.push_back(system.projected(p));
  }
  return out;
}

}  // namespace fkpath
