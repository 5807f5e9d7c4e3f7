#ifndef FKPATH_TEST_MODELS_HPP
#define FKPATH_TEST_MODELS_HPP

#include <cmath>
#include <vector>

#include "fkpath/fk_core.hpp"
#include "fkpath/garch.hpp"
#include "fkpath/logistic.hpp"
#include "fkpath/random.hpp"

namespace fkpath::testing {

// Two regimes with alpha = (1, 3), gamma = (0.3, 0.6), symmetric switching.
inline GarchSpec garch_two_state(std::size_t horizon, std::uint64_t seed = 5) {
  GarchSpec spec;
  spec.alpha = {1.0, 3.0};
  spec.gamma = {0.3, 0.6};
  spec.beta = {0.0, 0.0};
  spec.transition = {{0.7, 0.3}, {0.3, 0.7}};
  spec.initial = {0.5, 0.5};
  RandomSource rng(seed, 0);
  spec.y = simulate_garch(spec, horizon, rng).y;
  return spec;
}

inline LogisticSpec logistic_three_state(std::size_t horizon, double rho = 0.5, double l = 0.5,
                                         std::uint64_t seed = 5) {
  LogisticSpec spec = logistic_three_point(rho, l, {0.25, 0.5, 0.25}, 1.0);
  RandomSource rng(seed, 0);
  spec.y = simulate_logistic(spec, horizon, rng).y;
  return spec;
}

inline std::vector<double> random_weights(RandomSource& rng, std::size_t n, double floor = 0.0) {
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) {
    x = floor + rng.uniform();
    total += x;
  }
  for (double& x : w) x /= total;
  return w;
}

inline DiscreteMeasure<State> on_states(const std::vector<double>& w) {
  std::vector<State> atoms(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) atoms[i] = static_cast<State>(i);
  return DiscreteMeasure<State>(atoms, w);
}

inline Matrix random_stochastic(RandomSource& rng, std::size_t n) {
  Matrix q(n);
  for (auto& row : q) row = random_weights(rng, n, 0.05);
  return q;
}

}  // namespace fkpath::testing

#endif  // FKPATH_TEST_MODELS_HPP
