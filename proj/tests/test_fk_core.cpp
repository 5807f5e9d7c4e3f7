#include <cmath>
#include <map>

#include "doctest.h"
#include "fkpath/bounds.hpp"
#include "fkpath/fk_core.hpp"
#include "fkpath/garch.hpp"
#include "test_models.hpp"

using namespace fkpath;
using fkpath::testing::garch_two_state;
using fkpath::testing::on_states;
using fkpath::testing::random_stochastic;
using fkpath::testing::random_weights;

namespace {

FKModel uniform_model(FunctionPotential::Eval psi) {
  FKModel m;
  m.kernel = MixingKernel::homogeneous({{0.5, 0.5}, {0.5, 0.5}});
  m.zeta = on_states({0.5, 0.5});
  m.potential = std::make_shared<FunctionPotential>(std::move(psi));
  return m;
}

// Brute-force weight of every path of length n + 1, with the step-k
// potential evaluated on the last min(p, k + 1) states.
PathMeasure brute_force(const FKModel& m, std::size_t n, std::size_t p, bool truncated) {
  std::vector<Path> paths = enumerate_paths(m.num_states(), n + 1, 1u << 20);
  std::vector<double> w;
  for (const Path& path : paths) {
    double x = m.zeta.mass_of(path[0]);
    for (std::size_t k = 1; k <= n; ++k) {
      x *= m.kernel.prob(k, path[k - 1], path[k]);
      const std::span<const State> prefix(path.data(), k + 1);
      if (truncated && p <= k) {
        x *= m.potential->truncated(k, p, prefix.subspan(k + 1 - p));
      } else {
        x *= m.potential->eval(k, prefix);
      }
    }
    w.push_back(x);
  }
  return PathMeasure(paths, w).normalized();
}

// State-marginal of the last coordinate.
std::map<State, double> last_marginal(const PathMeasure& mu) {
  std::map<State, double> out;
  for (std::size_t i = 0; i < mu.size(); ++i) out[mu.atom(i).back()] += mu.weight(i);
  return out;
}

DiscreteMeasure<State> apply_kernel(const MixingKernel& k, const DiscreteMeasure<State>& mu) {
  std::vector<double> w(k.num_states(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto row = k.row(1, mu.atom(i));
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += mu.weight(i) * row[j];
  }
  return on_states(w);
}

}  // namespace

TEST_CASE("constant potential with uniform kernel spreads mass evenly") {
  const FKModel m = uniform_model([](std::size_t, std::span<const State>) { return 1.0; });
  const PathMeasure out = normalized_step(m, 1, PathMeasure::point_mass(Path{0}));
  CHECK(out.size() == 2);
  CHECK(out.mass_of(Path{0, 0}) == doctest::Approx(0.5));
  CHECK(out.mass_of(Path{0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("single-state forward step weights by the potential") {
  FKModel m;
  m.kernel = MixingKernel::homogeneous({{1.0}});
  m.zeta = DiscreteMeasure<State>::point_mass(0);
  m.potential = std::make_shared<FunctionPotential>(
      [](std::size_t, std::span<const State>) { return 0.25; });
  const PathMeasure out = forward_gamma(m, 1, PathMeasure::point_mass(Path{0}, 2.0));
  CHECK(out.size() == 1);
  CHECK(out.weight(0) == doctest::Approx(0.5));
}

TEST_CASE("hand-enumerated one-step marginal is (1/3, 2/3)") {
  const FKModel m = uniform_model(
      [](std::size_t, std::span<const State> path) { return path.back() == 0 ? 1.0 : 2.0; });
  const auto step = last_marginal(normalized_step(m, 1, initial_paths(m)));
  CHECK(step.at(0) == doctest::Approx(1.0 / 3.0));
  CHECK(step.at(1) == doctest::Approx(2.0 / 3.0));
  const auto exact = last_marginal(exact_path_filter(m, 1));
  CHECK(exact.at(0) == doctest::Approx(1.0 / 3.0));
  CHECK(exact.at(1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("exact filter at time zero is the initial law") {
  const GarchSpec spec = garch_two_state(3);
  const FKModel m = make_garch_model(spec);
  CHECK(exact_path_filter(m, 0) == initial_paths(m));
}

TEST_CASE("constant potentials give the chain's path law") {
  const FKModel m = uniform_model([](std::size_t, std::span<const State>) { return 3.0; });
  const PathMeasure out = exact_path_filter(m, 3);
  CHECK(out.size() == 16);
  for (double w : out.weights()) CHECK(w == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("projection onto the last p states") {
  const PathMeasure a = PathMeasure::point_mass(Path{0, 1, 1});
  CHECK(project_last_p(a, 2) == PathMeasure::point_mass(Path{1, 1}));
  CHECK(project_last_p(a, 5) == a);
  const PathMeasure b({Path{0, 0}, Path{1, 0}}, {0.5, 0.5});
  const PathMeasure proj = project_last_p(b, 1);
  CHECK(proj.size() == 1);
  CHECK(proj.mass_of(Path{0}) == doctest::Approx(1.0));
}

TEST_CASE("truncated step with p beyond n matches the true step") {
  const GarchSpec spec = garch_two_state(4);
  const FKModel m = make_garch_model(spec);
  PathMeasure mu = initial_paths(m);
  for (std::size_t n = 1; n <= 3; ++n) {
    const PathMeasure t = truncated_step(m, n, 10, mu);
    const PathMeasure f = normalized_step(m, n, mu);
    CHECK(tv_distance(t, f) < 1e-14);
    mu = f;
  }
}

TEST_CASE("truncated step with constant truncated potential is the shifted predictive") {
  const FKModel m = uniform_model([](std::size_t, std::span<const State>) { return 1.0; });
  const PathMeasure mu({Path{0, 0}, Path{0, 1}}, {0.25, 0.75});
  const PathMeasure out = truncated_step(m, 2, 2, mu);
  CHECK(out.mass_of(Path{0, 0}) == doctest::Approx(0.125));
  CHECK(out.mass_of(Path{1, 1}) == doctest::Approx(0.375));
}

TEST_CASE("2-state GARCH truncated filter at n = 3, p = 2 matches brute force") {
  const GarchSpec spec = garch_two_state(3);
  const FKModel m = make_garch_model(spec);
  const PathMeasure got = exact_truncated_filter(m, 3, 2);
  const PathMeasure want = project_last_p(brute_force(m, 3, 2, true), 2);
  CHECK(got.size() == 4);
  CHECK(tv_distance(got, want) < 1e-13);
  CHECK(got.total_mass() == doctest::Approx(1.0));
}

TEST_CASE("exact path filter matches brute force") {
  const GarchSpec spec = garch_two_state(6);
  const FKModel m = make_garch_model(spec);
  CHECK(tv_distance(exact_path_filter(m, 6), brute_force(m, 6, 0, false)) < 1e-13);
}

TEST_CASE("truncated filter with p beyond n equals the path filter") {
  const GarchSpec spec = garch_two_state(5);
  const FKModel m = make_garch_model(spec);
  for (std::size_t n = 0; n <= 5; ++n) {
    CHECK(tv_distance(exact_truncated_filter(m, n, n + 2), exact_path_filter(m, n)) < 1e-13);
  }
}

TEST_CASE("truncation is exact for genuinely p-limited potentials") {
  auto psi = [](std::size_t, std::span<const State> s) {
    return 1.0 + s.back() + 0.5 * (s.size() > 1 ? s[s.size() - 2] : 0);
  };
  FKModel m = uniform_model(psi);
  m.potential = std::make_shared<FunctionPotential>(
      psi, [psi](std::size_t n, std::size_t, std::span<const State> s) { return psi(n, s); });
  for (std::size_t n = 2; n <= 5; ++n) {
    const double gap =
        tv_distance(exact_truncated_filter(m, n, 2), project_last_p(exact_path_filter(m, n), 2));
    CHECK(gap < 1e-13);
    CHECK(global_truncation_gap(m, n, 2) < 1e-13);
    if (n > 2) CHECK(local_truncation_gap(m, 2, n, 2, exact_path_filter(m, 1)) < 1e-13);
  }
}

TEST_CASE("local gap vanishes while the truncated potential equals the true one") {
  const GarchSpec spec = garch_two_state(6);
  const FKModel m = make_garch_model(spec);
  // Psi~_k = Psi_k for k < p.
  CHECK(local_truncation_gap(m, 2, 3, 4, exact_path_filter(m, 1)) < 1e-14);
}

TEST_CASE("2-state GARCH local gap at k = 4, n = 6, p = 2 is within 2 phi_4 tau^2") {
  const GarchSpec spec = garch_two_state(6);
  const FKModel m = make_garch_model(spec);
  const GarchConstantsReport r = garch_constants(spec, GarchMode::beta_zero, 2);
  const double gap = local_truncation_gap(m, 4, 6, 2, exact_path_filter(m, 3));
  CHECK(gap > 0.0);
  CHECK(gap <= 2.0 * r.consts.phi[4] * r.tau * r.tau + 1e-12);
}

TEST_CASE("2-state GARCH global gap at n = 8, p = 3 is within the telescoping bound") {
  const GarchSpec spec = garch_two_state(8);
  const FKModel m = make_garch_model(spec);
  const GarchConstantsReport r = garch_constants(spec, GarchMode::beta_zero, 3);
  const double gap = global_truncation_gap(m, 8, 3);
  CHECK(gap <= tele2_bound(r.consts, 8, 3).value + 1e-12);
}

TEST_CASE("mixing certificate and epsilon") {
  const MixingKernel k = MixingKernel::homogeneous({{0.7, 0.3}, {0.3, 0.7}});
  CHECK(k.epsilon(1) == doctest::Approx(std::sqrt(3.0 / 7.0)));
  CHECK(k.mixing_violation(10) <= 1e-15);
  RandomSource rng(9, 0);
  for (int t = 0; t < 50; ++t) {
    const MixingKernel r = MixingKernel::homogeneous(random_stochastic(rng, 4));
    CHECK(r.mixing_violation(3) <= 1e-15);
    CHECK(r.epsilon(1) > 0.0);
    CHECK(r.epsilon(1) <= 1.0);
  }
  CHECK_THROWS_AS(MixingKernel::homogeneous({{1.0, 0.0}, {0.5, 0.5}}), FkError);
}

TEST_CASE("mixing kernels map TV into a bounded Hilbert distance") {
  RandomSource rng(10, 0);
  for (int t = 0; t < 200; ++t) {
    const MixingKernel k = MixingKernel::homogeneous(random_stochastic(rng, 4));
    const auto mu = on_states(random_weights(rng, 4));
    const auto nu = on_states(random_weights(rng, 4));
    const double eps = k.epsilon(1);
    CHECK(hilbert_metric(apply_kernel(k, mu), apply_kernel(k, nu)) <=
          tv_distance(mu, nu) / (eps * eps) + 1e-12);
  }
}

TEST_CASE("enumeration respects its budget") {
  CHECK(enumerate_paths(2, 3, 8).size() == 8);
  CHECK_THROWS_AS(enumerate_paths(2, 4, 8), FkError);
}

TEST_CASE("enumeration errors carry their kind") {
  try {
    enumerate_paths(3, 20, 100);
    FAIL("expected an error");
  } catch (const FkError& e) {
    CHECK(e.kind() == ErrorKind::enumeration_too_large);
  }
}
