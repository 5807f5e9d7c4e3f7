#ifndef FKPATH_MEASURES_HPP
#define FKPATH_MEASURES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fkpath/error.hpp"
#include "fkpath/random.hpp"

namespace fkpath {

/// A state of a finite chain, an index in [0, |E|).
using State = std::int32_t;

/// A path or path segment; ordered lexicographically.
using Path = std::vector<State>;

/// Weights below this are treated as exact zeros.
inline constexpr double kWeightFloor = 1e-300;

/**
 * Nonnegative measure over an explicit finite support.
 *
 * Atoms are kept sorted and pairwise distinct, which gives a canonical form:
 * two measures are equal iff their atom and weight vectors are equal, and
 * every reduction walks atoms in the same (lexicographic) order. Zero-weight
 * atoms are allowed and preserved.
 */
template <class Atom>
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  /// Atoms must be pairwise distinct; they need not be sorted.
  DiscreteMeasure(std::vector<Atom> atoms, std::vector<double> weights) {
    init(std::move(atoms), std::move(weights), false);
  }

  /// Like the constructor but sums the weights of repeated atoms.
  static DiscreteMeasure aggregate(std::vector<Atom> atoms, std::vector<double> weights) {
    DiscreteMeasure m;
    m.init(std::move(atoms), std::move(weights), true);
    return m;
  }

  static DiscreteMeasure point_mass(Atom atom, double mass = 1.0) {
    return DiscreteMeasure({std::move(atom)}, {mass});
  }

  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const Atom& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  double total_mass() const {
    double total = 0.0;
    for (double w : weights_) total += w;
    return total;
  }

  /// Weight attached to `a`, zero when `a` is not in the support.
  double mass_of(const Atom& a) const {
    const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
    if (it == atoms_.end() || !(*it == a)) return 0.0;
    return weights_[static_cast<std::size_t>(it - atoms_.begin())];
  }

  /// Probability view. Throws when the total mass is not positive.
  DiscreteMeasure normalized() const {
    const double total = total_mass();
    if (!(total > 0.0)) throw FkError(ErrorKind::degenerate_measure, "zero total mass");
    DiscreteMeasure out = *this;
    for (double& w : out.weights_) w /= total;
    return out;
  }

  DiscreteMeasure scaled(double factor) const {
    DiscreteMeasure out = *this;
    for (double& w : out.weights_) w *= factor;
    return out;
  }

  bool operator==(const DiscreteMeasure&) const = default;

 private:
  void init(std::vector<Atom> atoms, std::vector<double> weights, bool merge) {
    if (atoms.size() != weights.size()) {
      throw FkError(ErrorKind::dimension, "atom and weight counts differ");
    }
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
    atoms_.clear();
    weights_.clear();
    atoms_.reserve(atoms.size());
    weights_.reserve(atoms.size());
    for (std::size_t idx : order) {
      double w = weights[idx];
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw FkError(ErrorKind::invalid_argument, "weights must be finite and nonnegative");
      }
      if (w < kWeightFloor) w = 0.0;
      if (!atoms_.empty() && atoms_.back() == atoms[idx]) {
        if (!merge) throw FkError(ErrorKind::invalid_argument, "support atoms must be distinct");
        weights_.back() += w;
        continue;
      }
      atoms_.push_back(std::move(atoms[idx]));
      weights_.push_back(w);
    }
  }

  std::vector<Atom> atoms_;
  std::vector<double> weights_;
};

namespace detail {

/// Walks the union of two sorted supports, calling f(weight_mu, weight_nu)
/// once per atom of the union in order.
template <class Atom, class F>
void for_each_union(const DiscreteMeasure<Atom>& mu, const DiscreteMeasure<Atom>& nu, F&& f) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < mu.size() || j < nu.size()) {
    if (j == nu.size() || (i < mu.size() && mu.atom(i) < nu.atom(j))) {
      f(mu.weight(i++), 0.0);
    } else if (i == mu.size() || nu.atom(j) < mu.atom(i)) {
      f(0.0, nu.weight(j++));
    } else {
      f(mu.weight(i++), nu.weight(j++));
    }
  }
}

}  // namespace detail

/// sup over |f| <= 1 of |mu(f) - nu(f)|, i.e. the L1 distance of the weights
/// on the union support (2 for disjoint probability measures).
template <class Atom>
double tv_distance(const DiscreteMeasure<Atom>& mu, const DiscreteMeasure<Atom>& nu) {
  double total = 0.0;
  detail::for_each_union(mu, nu, [&](double a, double b) { total += std::abs(a - b); });
  return total;
}

/// Hilbert projective metric. Infinite when some atom carries mass under
/// exactly one of the two measures.
template <class Atom>
double hilbert_metric(const DiscreteMeasure<Atom>& mu, const DiscreteMeasure<Atom>& nu) {
  if (!(mu.total_mass() > 0.0) || !(nu.total_mass() > 0.0)) {
    throw FkError(ErrorKind::degenerate_measure, "Hilbert metric needs positive total mass");
  }
  double max_up = 0.0;
  double max_down = 0.0;
  bool comparable = true;
  detail::for_each_union(mu, nu, [&](double a, double b) {
    if (a > 0.0 && b > 0.0) {
      max_up = std::max(max_up, a / b);
      max_down = std::max(max_down, b / a);
    } else if (a > 0.0 || b > 0.0) {
      comparable = false;
    }
  });
  if (!comparable) return std::numeric_limits<double>::infinity();
  return std::log(max_up) + std::log(max_down);
}

/// Indices of n i.i.d. draws from the normalised weights.
std::vector<std::size_t> sample_indices(std::span<const double> weights, std::size_t n,
                                        RandomSource& rng);

template <class Atom>
std::vector<Atom> sample_multinomial(const DiscreteMeasure<Atom>& mu, std::size_t n,
                                     RandomSource& rng) {
  if (!(mu.total_mass() > 0.0)) {
    throw FkError(ErrorKind::degenerate_measure, "cannot sample from a zero-mass measure");
  }
  std::vector<Atom> out;
  out.reserve(n);
  for (std::size_t idx : sample_indices(mu.weights(), n, rng)) out.push_back(mu.atom(idx));
  return out;
}

}  // namespace fkpath

#endif  // FKPATH_MEASURES_HPP
