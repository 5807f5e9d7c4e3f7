#include <cmath>
#include <limits>

#include "doctest.h"
#include "fkpath/measures.hpp"
#include "fkpath/random.hpp"
#include "test_models.hpp"

using namespace fkpath;
using fkpath::testing::on_states;
using fkpath::testing::random_weights;

TEST_CASE("tv distance of point masses") {
  const auto a = DiscreteMeasure<State>::point_mass(0);
  const auto b = DiscreteMeasure<State>::point_mass(1);
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(a, b) == doctest::Approx(2.0));
}

TEST_CASE("tv distance on a shared two-point support") {
  const auto mu = on_states({0.7, 0.3});
  const auto nu = on_states({0.4, 0.6});
  CHECK(tv_distance(mu, nu) == doctest::Approx(0.6).epsilon(1e-15));
  // Supremum over f in {-1, 1}^2.
  double best = 0.0;
  for (int s0 : {-1, 1}) {
    for (int s1 : {-1, 1}) best = std::max(best, std::abs(s0 * 0.3 + s1 * -0.3));
  }
  CHECK(tv_distance(mu, nu) == doctest::Approx(best));
}

TEST_CASE("hilbert metric examples") {
  const auto mu = on_states({0.5, 0.5});
  CHECK(hilbert_metric(mu, mu) == 0.0);
  CHECK(hilbert_metric(mu.scaled(2.0), mu) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(hilbert_metric(mu, on_states({0.25, 0.75})) == doctest::Approx(std::log(3.0)));
  CHECK(std::isinf(hilbert_metric(mu, DiscreteMeasure<State>::point_mass(0))));
}

TEST_CASE("tiny weights are treated as zero") {
  const auto mu = on_states({1.0, 1e-310});
  CHECK(mu.weight(1) == 0.0);
  CHECK(std::isinf(hilbert_metric(mu, on_states({0.5, 0.5}))));
}

TEST_CASE("aggregate merges repeated atoms and the constructor rejects them") {
  const auto m = DiscreteMeasure<State>::aggregate({1, 0, 1}, {0.25, 0.5, 0.25});
  CHECK(m.size() == 2);
  CHECK(m.mass_of(1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(DiscreteMeasure<State>({1, 1}, {0.5, 0.5}), FkError);
  CHECK_THROWS_AS(DiscreteMeasure<State>({0}, {-1.0}), FkError);
}

TEST_CASE("sampling a point mass") {
  RandomSource rng(1, 0);
  const auto draws = sample_multinomial(DiscreteMeasure<State>::point_mass(3), 5, rng);
  CHECK(draws == std::vector<State>(5, 3));
}

TEST_CASE("sampling frequencies match the weights") {
  RandomSource rng(2, 0);
  const auto draws = sample_multinomial(on_states({0.5, 0.5}), 100000, rng);
  double zeros = 0.0;
  for (State s : draws) zeros += s == 0;
  CHECK(std::abs(zeros / 1e5 - 0.5) < 0.01);
}

TEST_CASE("random sources are reproducible per seed and stream") {
  RandomSource a(7, 0);
  RandomSource b(7, 0);
  RandomSource c(7, 1);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("tv and hilbert are symmetric and tv obeys the triangle inequality") {
  RandomSource rng(3, 0);
  for (int t = 0; t < 200; ++t) {
    const auto x = on_states(random_weights(rng, 5, 0.01));
    const auto y = on_states(random_weights(rng, 5, 0.01));
    const auto z = on_states(random_weights(rng, 5, 0.01));
    CHECK(tv_distance(x, y) == tv_distance(y, x));
    CHECK(hilbert_metric(x, y) == doctest::Approx(hilbert_metric(y, x)));
    CHECK(tv_distance(x, z) <= tv_distance(x, y) + tv_distance(y, z) + 1e-15);
  }
}
