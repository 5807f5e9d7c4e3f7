#include <cmath>

#include "doctest.h"
#include "fkpath/fk_core.hpp"
#include "fkpath/kalman.hpp"
#include "kalman_oracle.hpp"
#include "test_models.hpp"

using namespace fkpath;
using fkpath::testing::joint_potential;

namespace {

KalmanSpec two_state(std::size_t horizon, std::uint64_t seed = 31) {
  KalmanSpec s;
  s.h = {0.2, 0.3};
  s.v = {1.0, 1.5};
  s.w = {1.0, 1.2};
  s.transition = {{0.8, 0.2}, {0.2, 0.8}};
  s.initial = {0.5, 0.5};
  s.cap = 10.0;
  RandomSource rng(seed, 0);
  s.y = simulate_kalman(s, horizon, rng).y;
  return s;
}

}  // namespace

TEST_CASE("h = 0 reduces to independent observations") {
  KalmanSpec s = two_state(3);
  s.h = {0.0, 0.0};
  s.y = {0.0, 0.7, -1.2, 2.0};
  const Path path{0, 1, 0, 1};
  for (std::size_t n = 1; n <= 3; ++n) {
    const KalmanStep st = kalman_recursion(s, n, path);
    const auto i = static_cast<std::size_t>(path[n]);
    const double v = s.v[i];
    const double w = s.w[i];
    CHECK(st.mu == 0.0);
    CHECK(st.sigma2 == doctest::Approx(v + w));
    CHECK(st.gain == doctest::Approx(w / (v + w)));
    CHECK(st.m == doctest::Approx(w / (v + w) * s.y[n]));
    CHECK(st.c == doctest::Approx(v * w / (v + w)));
  }
  s.y = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t n = 1; n <= 3; ++n) CHECK(kalman_recursion(s, n, path).m == 0.0);
}

TEST_CASE("recursion matches the joint Gaussian likelihood") {
  const KalmanSpec s = two_state(8);
  const KalmanPotential pot(s);
  for (const Path& path : enumerate_paths(2, 9, 1000)) {
    for (std::size_t n = 1; n <= 8; ++n) {
      const std::span<const State> prefix(path.data(), n + 1);
      const double want = joint_potential(s, path, n);
      CHECK(std::abs(pot.eval(n, prefix) / want - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("recursive statistic reproduces eval") {
  const KalmanSpec s = two_state(6);
  const KalmanPotential pot(s);
  for (const Path& path : enumerate_paths(2, 7, 1000)) {
    double stat[2];
    pot.init_stat(path[0], stat);
    for (std::size_t n = 1; n <= 6; ++n) {
      const std::span<const State> prefix(path.data(), n + 1);
      CHECK(pot.advance(n, prefix.last(1), stat) ==
            doctest::Approx(pot.eval(n, prefix)).epsilon(1e-13));
    }
  }
}

TEST_CASE("tau_sigma example") {
  CHECK(kalman_tau_sigma(1.0, 1.0) == doctest::Approx(1.0 / (2.0 + 2.0 * std::sqrt(2.0))));
  CHECK(kalman_tau_sigma(1.0, 1.0) == doctest::Approx(0.20711).epsilon(1e-5));
}

TEST_CASE("h = 0 removes the state dependence from the constants") {
  KalmanSpec s = two_state(5);
  s.h = {0.0, 0.0};
  const KalmanConstantsReport r = kalman_constants(s);
  CHECK(r.C_sigma == 0.0);
  CHECK(r.C_mu == 0.0);
  CHECK(r.tau == r.tau_sigma);
}

TEST_CASE("upsilon contracts by tau_sigma") {
  RandomSource rng(32, 0);
  for (int t = 0; t < 20; ++t) {
    KalmanSpec s = two_state(0);
    for (std::size_t i = 0; i < 2; ++i) {
      s.h[i] = 2.0 * rng.uniform() - 1.0;
      s.v[i] = 0.1 + 3.0 * rng.uniform();
      s.w[i] = 0.1 + 3.0 * rng.uniform();
    }
    const KalmanBoxes b = kalman_boxes(s);
    const double ts = kalman_tau_sigma(b.w_lo, b.v_hi);
    const double lo = std::log(b.c_lo);
    const double hi = std::log(b.c_hi);
    const double step = 1e-5;
    for (int g = 0; g <= 500; ++g) {
      const double lc = lo + (hi - lo) * g / 500.0;
      for (State st : {0, 1}) {
        const double d = (kalman_upsilon(s, lc + step, st) - kalman_upsilon(s, lc - step, st)) /
                         (2.0 * step);
        CHECK(std::abs(d) <= ts + 1e-9);
      }
    }
  }
}

TEST_CASE("posterior variance can fall below the lower noise variance") {
  // With v = w = 0.5 in one state, c = vw / (v + w) = 0.25, below min(v, w).
  KalmanSpec s = two_state(0);
  s.h = {0.0, 0.0};
  s.v = {0.5, 2.0};
  s.w = {0.5, 2.0};
  s.y = {0.0, 1.0};
  const Path path{0, 0};
  const double c = kalman_recursion(s, 1, path).c;
  CHECK(c == doctest::Approx(0.25));
  const KalmanBoxes b = kalman_boxes(s);
  CHECK(b.c_lo <= c);
  CHECK(c < 0.5);
}

TEST_CASE("c and sigma^2 stay inside their boxes") {
  RandomSource rng(33, 0);
  for (int t = 0; t < 20; ++t) {
    const KalmanSpec s = two_state(20, 100 + t);
    const KalmanBoxes b = kalman_boxes(s);
    const Path path = sample_chain(state_measure(s.initial, 2),
                                   MixingKernel::homogeneous(s.transition), 20, rng);
    KalmanStep st;
    for (std::size_t n = 1; n <= 20; ++n) {
      st = kalman_update(s, path[n], s.y[n], st.m, st.c);
      CHECK(st.c >= b.c_lo * (1 - 1e-14));
      CHECK(st.c <= b.c_hi * (1 + 1e-14));
      CHECK(st.sigma2 >= b.sigma2_lo * (1 - 1e-14));
      CHECK(st.sigma2 <= b.sigma2_hi * (1 + 1e-14));
    }
  }
}

TEST_CASE("sigma^2 contracts for paths sharing their last p states") {
  const KalmanSpec s = two_state(8);
  const KalmanConstantsReport r = kalman_constants(s);
  const auto paths = enumerate_paths(2, 9, 1000);
  for (std::size_t p = 1; p <= 6; ++p) {
    for (const Path& a : paths) {
      for (const Path& b : paths) {
        if (!std::equal(a.end() - p, a.end(), b.end() - p)) continue;
        const double diff =
            std::abs(kalman_recursion(s, 8, a).sigma2 - kalman_recursion(s, 8, b).sigma2);
        CHECK(diff <= r.C_sigma * std::pow(r.tau_sigma, double(p)));
      }
    }
  }
}

TEST_CASE("predictive mean is bounded through kappa") {
  const KalmanSpec s = two_state(12);
  const KalmanConstantsReport r = kalman_constants(s);
  RandomSource rng(34, 0);
  for (int t = 0; t < 200; ++t) {
    const Path path = sample_chain(state_measure(s.initial, 2),
                                   MixingKernel::homogeneous(s.transition), 12, rng);
    double running = 0.0;
    KalmanStep st;
    for (std::size_t n = 1; n <= 12; ++n) {
      st = kalman_update(s, path[n], s.y[n], st.m, st.c);
      CHECK(std::abs(st.mu) <= running * r.kappa + 1e-12);
      running = std::max(running, std::abs(s.y[n]));
    }
  }
}

TEST_CASE("truncation certificate holds exhaustively for the Kalman model") {
  const KalmanSpec s = two_state(8);
  const FKModel m = make_kalman_model(s);
  const KalmanConstantsReport r = kalman_constants(s);
  for (std::size_t p = 1; p <= 8; ++p) {
    for (std::size_t n = p; n <= 8; ++n) {
      CHECK(potential_range(m, n, p).max_relative_gap <=
            r.phi * std::pow(r.tau, double(p)) * (1 + 1e-12));
    }
  }
}

TEST_CASE("constants are finite and clamped to at least 1") {
  const KalmanConstantsReport r = kalman_constants(two_state(5));
  CHECK(r.feasible);
  CHECK(std::isfinite(r.C_mu));
  CHECK(std::isfinite(r.phi));
  for (std::size_t n = 1; n <= 5; ++n) {
    CHECK(r.consts.a[n] >= 1.0);
    CHECK(r.consts.b[n] >= 1.0);
  }
}

TEST_CASE("h equal to tau_sigma is reported as infeasible") {
  KalmanSpec s = two_state(3);
  const double ts = kalman_tau_sigma(1.0, 1.5);
  s.h = {ts, 0.1};
  const KalmanConstantsReport r = kalman_constants(s);
  CHECK(!r.feasible);
  CHECK(!r.stable);
}

TEST_CASE("h = 0 simulation gives i.i.d. N(0, v + w) observations") {
  KalmanSpec s = two_state(0);
  s.h = {0.0, 0.0};
  s.v = {1.0, 1.0};
  s.w = {0.5, 0.5};
  s.cap = 100.0;
  RandomSource rng(35, 0);
  const KalmanData d = simulate_kalman(s, 100000, rng);
  double sum = 0.0;
  for (std::size_t n = 1; n < d.y.size(); ++n) sum += d.y[n] * d.y[n];
  CHECK(std::abs(sum / 1e5 / 1.5 - 1.0) < 0.05);
  CHECK(d.rejection_rate == 0.0);
}

TEST_CASE("observation cap is enforced and reported") {
  KalmanSpec s = two_state(0);
  s.cap = 1.0;
  RandomSource rng(36, 0);
  const KalmanData d = simulate_kalman(s, 2000, rng);
  for (double y : d.y) CHECK(std::abs(y) <= 1.0);
  CHECK(d.rejection_rate > 0.0);
}
