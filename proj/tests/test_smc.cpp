#include <cmath>

#include "doctest.h"
#include "fkpath/garch.hpp"
#include "fkpath/smc.hpp"
#include "test_models.hpp"

using namespace fkpath;
using fkpath::testing::garch_two_state;
using fkpath::testing::on_states;

namespace {

FKModel toy_model(FunctionPotential::Eval psi) {
  FKModel m;
  m.kernel = MixingKernel::homogeneous({{0.5, 0.5}, {0.5, 0.5}});
  m.zeta = on_states({0.5, 0.5});
  m.potential = std::make_shared<FunctionPotential>(std::move(psi));
  return m;
}

}  // namespace

TEST_CASE("constant potential leaves equal weights") {
  const FKModel m = toy_model([](std::size_t, std::span<const State>) { return 0.3; });
  ParticleSystem sys(m, 100, ParticleMode::full_path, 2, kUnlimitedMemory, RandomSource(1, 1));
  for (int k = 0; k < 3; ++k) sys = particle_step(m, std::move(sys));
  for (double w : sys.weights()) CHECK(w == 0.3);
  ParticleSystem tr(m, 100, ParticleMode::truncated, 2, 2, RandomSource(1, 1));
  for (int k = 0; k < 3; ++k) tr = truncated_particle_step(m, std::move(tr), 2);
  for (double w : tr.weights()) CHECK(w == 0.3);
}

TEST_CASE("a single particle follows the chain with weight Psi_n") {
  const GarchSpec spec = garch_two_state(4);
  const FKModel m = make_garch_model(spec);
  ParticleSystem sys(m, 1, ParticleMode::full_path, 1, kUnlimitedMemory, RandomSource(2, 1));
  for (int k = 0; k < 4; ++k) sys = particle_step(m, std::move(sys));
  const auto path = sys.states(0);
  CHECK(path.size() == 5);
  CHECK(sys.weights()[0] == doctest::Approx(m.potential->eval(4, path)).epsilon(1e-13));
}

TEST_CASE("time-zero system draws from zeta with equal weights") {
  const GarchSpec spec = garch_two_state(2);
  const FKModel m = make_garch_model(spec);
  const auto out = run_filter(m, 0, 50000, ParticleMode::full_path, 1, RandomSource(3, 1));
  REQUIRE(out.size() == 1);
  CHECK(tv_distance(out[0], initial_paths(m)) < 0.02);
  ParticleSystem sys(m, 10, ParticleMode::full_path, 1, kUnlimitedMemory, RandomSource(3, 1));
  for (double w : sys.weights()) CHECK(w == 1.0);
}

TEST_CASE("same seed gives identical runs") {
  const GarchSpec spec = garch_two_state(5);
  const FKModel m = make_garch_model(spec);
  const auto a = run_filter(m, 5, 500, ParticleMode::full_path, 2, RandomSource(4, 1));
  const auto b = run_filter(m, 5, 500, ParticleMode::full_path, 2, RandomSource(4, 1));
  CHECK(a == b);
  const auto c = run_filter(m, 5, 500, ParticleMode::full_path, 2, RandomSource(4, 2));
  CHECK(!(a == c));
}

TEST_CASE("one-step marginal converges to (1/3, 2/3)") {
  const FKModel m = toy_model(
      [](std::size_t, std::span<const State> path) { return path.back() == 0 ? 1.0 : 2.0; });
  const PathMeasure exact = project_last_p(exact_path_filter(m, 1), 1);
  double total = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto out = run_filter(m, 1, 100000, ParticleMode::full_path, 1, RandomSource(5, r + 1));
    total += tv_distance(out[1], exact);
  }
  CHECK(total / reps <= 0.02);
}

TEST_CASE("truncated system with p beyond n matches the projected full system") {
  const GarchSpec spec = garch_two_state(4);
  const FKModel m = make_garch_model(spec);
  const auto full = run_filter(m, 4, 300, ParticleMode::full_path, 10, RandomSource(6, 1));
  const auto trunc = run_filter(m, 4, 300, ParticleMode::truncated, 10, RandomSource(6, 1));
  for (std::size_t k = 0; k <= 4; ++k) CHECK(tv_distance(full[k], trunc[k]) < 1e-12);
}

TEST_CASE("2-state GARCH truncated system approaches the truncated filter") {
  const GarchSpec spec = garch_two_state(8);
  const FKModel m = make_garch_model(spec);
  const PathMeasure exact = exact_truncated_filter(m, 8, 3);
  double total = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto out = run_filter(m, 8, 100000, ParticleMode::truncated, 3, RandomSource(7, r + 1));
    total += tv_distance(out[8], exact);
  }
  CHECK(total / reps <= 0.02);
}

TEST_CASE("coupled step: no discrepancy when the truncated potential is exact") {
  const GarchSpec spec = garch_two_state(4);
  const FKModel m = make_garch_model(spec);
  ParticleSystem sys(m, 1000, ParticleMode::full_path, 6, kUnlimitedMemory, RandomSource(8, 1));
  for (std::size_t k = 1; k <= 4; ++k) {
    CoupledStepResult res = coupled_step(m, std::move(sys), 6);
    CHECK(res.diagnostics.weight_discrepancy == 0.0);
    CHECK(res.diagnostics.projected_discrepancy == 0.0);
    sys = std::move(res.full);
  }

  auto psi = [](std::size_t, std::span<const State> s) { return 1.0 + s.back(); };
  FKModel limited = toy_model(psi);
  limited.potential = std::make_shared<FunctionPotential>(
      psi, [psi](std::size_t n, std::size_t, std::span<const State> s) { return psi(n, s); });
  ParticleSystem ls(limited, 500, ParticleMode::full_path, 1, kUnlimitedMemory, RandomSource(8, 2));
  for (std::size_t k = 1; k <= 4; ++k) {
    CoupledStepResult res = coupled_step(limited, std::move(ls), 1);
    CHECK(res.diagnostics.weight_discrepancy == 0.0);
    ls = std::move(res.full);
  }
}

TEST_CASE("2-state GARCH coupling at k = 5, p = 2 holds pathwise") {
  const GarchSpec spec = garch_two_state(5);
  const FKModel m = make_garch_model(spec);
  const GarchConstantsReport r = garch_constants(spec, GarchMode::beta_zero, 2);
  const double bound = r.consts.phi[5] * r.tau * r.tau;
  for (int rep = 0; rep < 20; ++rep) {
    ParticleSystem sys(m, 10000, ParticleMode::full_path, 2, 2, RandomSource(9, rep + 1));
    for (std::size_t k = 1; k < 5; ++k) sys = particle_step(m, std::move(sys));
    const CoupledStepResult res = coupled_step(m, std::move(sys), 2, bound);
    CHECK(res.diagnostics.time == 5);
    CHECK(res.diagnostics.weight_discrepancy > 0.0);
    CHECK(res.diagnostics.weight_discrepancy <= bound);
    CHECK(res.diagnostics.projected_discrepancy <= res.diagnostics.weight_discrepancy + 1e-15);
  }
}

TEST_CASE("one-step particle error is within 2 a b / sqrt(N)") {
  const GarchSpec spec = garch_two_state(1);
  const FKModel m = make_garch_model(spec);
  const GarchConstantsReport r = garch_constants(spec, GarchMode::beta_zero, 1);
  const PathMeasure exact = exact_path_filter(m, 1);
  const std::size_t N = 1000;
  const int reps = 100;
  double total = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const auto out = run_filter(m, 1, N, ParticleMode::full_path, 2, RandomSource(10, rep + 1));
    total += 0.5 * tv_distance(out[1], exact);
  }
  CHECK(total / reps <= 2.0 * r.consts.a[1] * r.consts.b[1] / std::sqrt(double(N)));
}

TEST_CASE("bounded memory reproduces the full-path projection") {
  const GarchSpec spec = garch_two_state(8);
  const FKModel m = make_garch_model(spec);
  RunOptions small{4};
  const auto capped = run_filter(m, 8, 400, ParticleMode::full_path, 3, RandomSource(11, 1), small);
  const auto full = run_filter(m, 8, 400, ParticleMode::full_path, 3, RandomSource(11, 1));
  for (std::size_t k = 0; k <= 8; ++k) CHECK(tv_distance(capped[k], full[k]) < 1e-12);
}
