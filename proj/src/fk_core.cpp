#include "fkpath/fk_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace fkpath {

MixingKernel::MixingKernel(std::vector<Matrix> transitions) : transitions_(std::move(transitions)) {
  if (transitions_.empty() || transitions_.front().empty()) {
    throw FkError(ErrorKind::invalid_argument, "kernel needs at least one non-empty matrix");
  }
  num_states_ = transitions_.front().size();
  for (const Matrix& q : transitions_) {
    if (q.size() != num_states_) throw FkError(ErrorKind::dimension, "kernel matrices differ in size");
    std::vector<double> flat;
    std::vector<double> cumulative;
    for (const auto& r : q) {
      if (r.size() != num_states_) throw FkError(ErrorKind::dimension, "kernel matrix is not square");
      double total = 0.0;
      for (double x : r) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
          throw FkError(ErrorKind::invalid_argument, "transition probabilities must be nonnegative");
        }
        total += x;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw FkError(ErrorKind::invalid_argument, "transition rows must sum to one");
      }
      double running = 0.0;
      for (double x : r) {
        flat.push_back(x);
        running += x;
        cumulative.push_back(running);
      }
    }
    std::vector<double> xi(num_states_);
    double eps = 1.0;
    for (std::size_t j = 0; j < num_states_; ++j) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (std::size_t i = 0; i < num_states_; ++i) {
        lo = std::min(lo, q[i][j]);
        hi = std::max(hi, q[i][j]);
      }
      if (hi > 0.0) {
        xi[j] = std::sqrt(lo * hi);
        eps = std::min(eps, std::sqrt(lo / hi));
      }
    }
    if (!(eps > 0.0)) {
      throw FkError(ErrorKind::invalid_argument,
                    "kernel is not mixing: some column mixes zero and positive entries");
    }
    flat_.push_back(std::move(flat));
    cumulative_.push_back(std::move(cumulative));
    eps_.push_back(eps);
    reference_.push_back(std::move(xi));
  }
}

std::size_t MixingKernel::slot(std::size_t n) const {
  if (n == 0) throw FkError(ErrorKind::invalid_argument, "kernel time index starts at 1");
  return std::min(n - 1, transitions_.size() - 1);
}

std::span<const double> MixingKernel::row(std::size_t n, State prev) const {
  const auto& flat = flat_[slot(n)];
  return {flat.data() + static_cast<std::size_t>(prev) * num_states_, num_states_};
}

std::span<const double> MixingKernel::cumulative_row(std::size_t n, State prev) const {
  const auto& cum = cumulative_[slot(n)];
  return {cum.data() + static_cast<std::size_t>(prev) * num_states_, num_states_};
}

double MixingKernel::epsilon(std::size_t n) const { return eps_[slot(n)]; }

const std::vector<double>& MixingKernel::reference(std::size_t n) const {
  return reference_[slot(n)];
}

double MixingKernel::mixing_violation(std::size_t horizon) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= horizon; ++n) {
    const double eps = epsilon(n);
    const auto& xi = reference(n);
    for (std::size_t i = 0; i < num_states_; ++i) {
      const auto r = row(n, static_cast<State>(i));
      for (std::size_t j = 0; j < num_states_; ++j) {
        worst = std::max(worst, eps * xi[j] - r[j]);
        worst = std::max(worst, r[j] - xi[j] / eps);
      }
    }
  }
  return worst;
}

double PathPotential::truncated(std::size_t n, std::size_t p,
                                std::span<const State> segment) const {
  if (p == 0) throw FkError(ErrorKind::invalid_argument, "truncation depth must be positive");
  const std::size_t expected = std::min(p, n + 1);
  if (segment.size() != expected) {
    throw FkError(ErrorKind::dimension, "segment length " + std::to_string(segment.size()) +
                                            ", expected " + std::to_string(expected));
  }
  if (p > n) return eval(n, segment);
  return truncated_impl(n, p, segment);
}

std::size_t PathPotential::required_memory() const {
  return std::numeric_limits<std::size_t>::max();
}

void PathPotential::init_stat(State, std::span<double>) const {}

double PathPotential::advance(std::size_t n, std::span<const State> tail,
                              std::span<double>) const {
  if (tail.size() != n + 1) {
    throw FkError(ErrorKind::dimension, "potential needs the full path");
  }
  return eval(n, tail);
}

double FunctionPotential::truncated_impl(std::size_t n, std::size_t p,
                                         std::span<const State> segment) const {
  if (truncated_) return truncated_(n, p, segment);
  Path padded(n + 1, State{0});
  std::copy(segment.begin(), segment.end(), padded.end() - static_cast<std::ptrdiff_t>(p));
  return eval_(n, padded);
}

void FKModel::validate() const {
  if (!potential) throw FkError(ErrorKind::invalid_argument, "model has no potential");
  if (min_p < 1) throw FkError(ErrorKind::invalid_argument, "min_p must be at least 1");
  if (!(zeta.total_mass() > 0.0)) throw FkError(ErrorKind::degenerate_measure, "initial law");
  for (State s : zeta.atoms()) {
    if (s < 0 || static_cast<std::size_t>(s) >= num_states()) {
      throw FkError(ErrorKind::dimension, "initial law outside the state space");
    }
  }
}

PathMeasure initial_paths(const FKModel& model) {
  std::vector<Path> atoms;
  for (State s : model.zeta.atoms()) atoms.push_back(Path{s});
  return PathMeasure(std::move(atoms), model.zeta.normalized().weights());
}

namespace {

void require_length(const PathMeasure& mu, std::size_t length) {
  for (const Path& a : mu.atoms()) {
    if (a.size() != length) {
      throw FkError(ErrorKind::dimension, "atom of length " + std::to_string(a.size()) +
                                              ", expected " + std::to_string(length));
    }
  }
}

PathMeasure normalize_step(PathMeasure gamma) {
  if (!(gamma.total_mass() > 0.0)) {
    throw FkError(ErrorKind::degenerate_step, "forward kernel produced zero mass");
  }
  return gamma.normalized();
}

}  // namespace

PathMeasure forward_gamma(const FKModel& model, std::size_t n, const PathMeasure& mu) {
  if (n == 0) throw FkError(ErrorKind::invalid_argument, "forward kernels start at n = 1");
  require_length(mu, n);
  const std::size_t states = model.num_states();
  std::vector<Path> atoms;
  std::vector<double> weights;
  atoms.reserve(mu.size() * states);
  weights.reserve(mu.size() * states);
  Path extended;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Path& path = mu.atom(i);
    const auto q = model.kernel.row(n, path.back());
    for (std::size_t s = 0; s < states; ++s) {
      if (q[s] == 0.0) continue;
      extended = path;
      extended.push_back(static_cast<State>(s));
      const double w = mu.weight(i) * q[s] * model.potential->eval(n, extended);
      atoms.push_back(extended);
      weights.push_back(w);
    }
  }
  // Appending in state order keeps lexicographic order, so the constructor's
  // sort is a no-op pass.
  return PathMeasure(std::move(atoms), std::move(weights));
}

PathMeasure normalized_step(const FKModel& model, std::size_t n, const PathMeasure& mu) {
  return normalize_step(forward_gamma(model, n, mu));
}

PathMeasure project_last_p(const PathMeasure& mu, std::size_t p) {
  if (p == 0) throw FkError(ErrorKind::invalid_argument, "truncation depth must be positive");
  std::map<Path, double> marginal;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Path& path = mu.atom(i);
    const std::size_t keep = std::min(p, path.size());
    marginal[Path(path.end() - static_cast<std::ptrdiff_t>(keep), path.end())] += mu.weight(i);
  }
  std::vector<Path> atoms;
  std::vector<double> weights;
  atoms.reserve(marginal.size());
  weights.reserve(marginal.size());
  for (auto& [atom, w] : marginal) {
    atoms.push_back(atom);
    weights.push_back(w);
  }
  return PathMeasure(std::move(atoms), std::move(weights));
}

PathMeasure truncated_step(const FKModel& model, std::size_t n, std::size_t p,
                           const PathMeasure& mu) {
  if (p == 0) throw FkError(ErrorKind::invalid_argument, "truncation depth must be positive");
  if (n < p) return normalized_step(model, n, mu);
  if (p < model.min_p) {
    throw FkError(ErrorKind::invalid_argument, "truncation depth below the model's min_p");
  }
  require_length(mu, p);
  const std::size_t states = model.num_states();
  std::map<Path, double> next;
  Path shifted(p);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Path& seg = mu.atom(i);
    const auto q = model.kernel.row(n, seg.back());
    std::copy(seg.begin() + 1, seg.end(), shifted.begin());
    for (std::size_t s = 0; s < states; ++s) {
      if (q[s] == 0.0) continue;
      shifted.back() = static_cast<State>(s);
      next[shifted] += mu.weight(i) * q[s] * model.potential->truncated(n, p, shifted);
    }
  }
  std::vector<Path> atoms;
  std::vector<double> weights;
  for (auto& [atom, w] : next) {
    atoms.push_back(atom);
    weights.push_back(w);
  }
  return normalize_step(PathMeasure(std::move(atoms), std::move(weights)));
}

namespace {

void check_budget(std::size_t num_states, std::size_t length, std::size_t budget) {
  double count = 1.0;
  for (std::size_t i = 0; i < length; ++i) count *= static_cast<double>(num_states);
  if (count > static_cast<double>(budget)) {
    throw FkError(ErrorKind::enumeration_too_large,
                  std::to_string(num_states) + "^" + std::to_string(length) +
                      " atoms exceeds the budget of " + std::to_string(budget));
  }
}

}  // namespace

PathMeasure exact_path_filter(const FKModel& model, std::size_t n, std::size_t budget) {
  model.validate();
  check_budget(model.num_states(), n + 1, budget);
  PathMeasure mu = initial_paths(model);
  for (std::size_t k = 1; k <= n; ++k) mu = normalized_step(model, k, mu);
  return mu;
}

PathMeasure exact_truncated_filter(const FKModel& model, std::size_t n, std::size_t p,
                                   std::size_t budget) {
  model.validate();
  if (p == 0) throw FkError(ErrorKind::invalid_argument, "truncation depth must be positive");
  check_budget(model.num_states(), std::min(p, n + 1), budget);
  PathMeasure mu = initial_paths(model);
  for (std::size_t k = 1; k <= n; ++k) mu = truncated_step(model, k, p, mu);
  return mu;
}

double local_truncation_gap(const FKModel& model, std::size_t k, std::size_t n, std::size_t p,
                            const PathMeasure& mu, std::size_t budget) {
  if (k < 1 || k >= n) throw FkError(ErrorKind::invalid_argument, "need 1 <= k < n");
  check_budget(model.num_states(), k + 1, budget);
  require_length(mu, k);
  const PathMeasure start = mu.normalized();

  // R~_{k+1:n} H_k^p R_k mu
  PathMeasure through_true = project_last_p(normalized_step(model, k, start), p);
  for (std::size_t i = k + 1; i <= n; ++i) through_true = truncated_step(model, i, p, through_true);

  // R~_{k:n} H_{k-1}^p mu
  PathMeasure through_truncated = project_last_p(start, p);
  for (std::size_t i = k; i <= n; ++i) {
    through_truncated = truncated_step(model, i, p, through_truncated);
  }
  return tv_distance(through_true, through_truncated);
}

double global_truncation_gap(const FKModel& model, std::size_t n, std::size_t p,
                             std::size_t budget) {
  const PathMeasure truncated = exact_truncated_filter(model, n, p, budget);
  const PathMeasure projected = project_last_p(exact_path_filter(model, n, budget), p);
  return tv_distance(truncated, projected);
}

std::vector<Path> enumerate_paths(std::size_t num_states, std::size_t length, std::size_t budget) {
  check_budget(num_states, length, budget);
  std::vector<Path> out;
  Path current(length, State{0});
  if (num_states == 0) return out;
  while (true) {
    out.push_back(current);
    std::size_t pos = length;
    while (pos > 0) {
      --pos;
      if (static_cast<std::size_t>(++current[pos]) < num_states) break;
      current[pos] = 0;
      if (pos == 0) return out;
    }
    if (length == 0) return out;
  }
}

PotentialRange potential_range(const FKModel& model, std::size_t n, std::size_t p,
                               std::size_t budget) {
  PotentialRange range{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  const std::size_t keep = std::min(p, n + 1);
  for (const Path& path : enumerate_paths(model.num_states(), n + 1, budget)) {
    const double full = model.potential->eval(n, path);
    const double trunc = model.potential->truncated(
        n, p, std::span<const State>(path).subspan(path.size() - keep));
    range.min = std::min({range.min, full, trunc});
    range.max = std::max({range.max, full, trunc});
    range.max_relative_gap =
        std::max(range.max_relative_gap, std::abs(full - trunc) / std::min(full, trunc));
  }
  return range;
}

DiscreteMeasure<State> state_measure(std::span<const double> weights, std::size_t num_states) {
  if (num_states == 0) throw FkError(ErrorKind::invalid_argument, "empty state space");
  std::vector<State> atoms(num_states);
  std::vector<double> w(num_states, 1.0 / static_cast<double>(num_states));
  for (std::size_t i = 0; i < num_states; ++i) atoms[i] = static_cast<State>(i);
  if (!weights.empty()) {
    if (weights.size() != num_states) {
      throw FkError(ErrorKind::dimension, "initial law must have one weight per state");
    }
    w.assign(weights.begin(), weights.end());
  }
  DiscreteMeasure<State> out(std::move(atoms), std::move(w));
  return out.normalized();
}

Path sample_chain(const DiscreteMeasure<State>& zeta, const MixingKernel& kernel,
                  std::size_t horizon, RandomSource& rng) {
  std::vector<double> cumulative;
  double running = 0.0;
  for (double w : zeta.weights()) cumulative.push_back(running += w);
  Path path(horizon + 1);
  path[0] = zeta.atom(rng.categorical(cumulative));
  for (std::size_t n = 1; n <= horizon; ++n) {
    path[n] = static_cast<State>(rng.categorical(kernel.cumulative_row(n, path[n - 1])));
  }
  return path;
}

}  // namespace fkpath
