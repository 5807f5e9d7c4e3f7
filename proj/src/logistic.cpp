#include "fkpath/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fkpath {

double LogisticSpec::l() const {
  double out = 0.0;
  for (double s : support) out = std::max(out, std::abs(s));
  return out;
}

double LogisticSpec::l_prime() const { return l() / (1.0 - std::abs(rho)); }

void LogisticSpec::validate() const {
  if (!(std::abs(rho) < 1.0)) throw FkError(ErrorKind::invalid_argument, "|rho| must be below 1");
  if (support.empty()) throw FkError(ErrorKind::invalid_argument, "empty innovation support");
  if (weights.size() != support.size()) {
    throw FkError(ErrorKind::dimension, "one innovation weight per support point");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw FkError(ErrorKind::invalid_argument, "innovation weights must be positive");
  }
  if (!(K >= 0.0)) throw FkError(ErrorKind::invalid_argument, "K must be nonnegative");
  for (std::size_t n = 1; n < y.size(); ++n) {
    if (y[n] != 1.0 && y[n] != -1.0) {
      throw FkError(ErrorKind::invalid_argument, "observations must be -1 or 1");
    }
  }
}

LogisticSpec logistic_three_point(double rho, double l, std::vector<double> weights, double K) {
  LogisticSpec spec;
  spec.rho = rho;
  spec.support = {-l, 0.0, l};
  spec.weights = std::move(weights);
  spec.K = K;
  return spec;
}

double logistic_state(const LogisticSpec& spec, std::span<const State> path, std::size_t lags) {
  double x = 0.0;
  double rk = 1.0;
  const std::size_t len = std::min(lags, path.size());
  for (std::size_t k = 0; k < len; ++k) {
    x += rk * spec.support[static_cast<std::size_t>(path[path.size() - 1 - k])];
    rk *= spec.rho;
  }
  return x;
}

LogisticPotential::LogisticPotential(LogisticSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

double LogisticPotential::psi(std::size_t n, double x) const {
  if (n == 0 || n >= spec_.y.size()) {
    throw FkError(ErrorKind::horizon_exceeded, "no observation at time " + std::to_string(n));
  }
  return 1.0 / (1.0 + std::exp(spec_.y[n] * x));
}

double LogisticPotential::eval(std::size_t n, std::span<const State> path) const {
  if (path.size() != n + 1) throw FkError(ErrorKind::dimension, "path length must be n + 1");
  return psi(n, logistic_state(spec_, path, path.size()));
}

void LogisticPotential::init_stat(State first, std::span<double> stat) const {
  stat[0] = spec_.support[static_cast<std::size_t>(first)];
}

double LogisticPotential::advance(std::size_t n, std::span<const State> tail,
                                  std::span<double> stat) const {
  stat[0] = spec_.rho * stat[0] + spec_.support[static_cast<std::size_t>(tail.back())];
  return psi(n, stat[0]);
}

double LogisticPotential::truncated_impl(std::size_t n, std::size_t p,
                                         std::span<const State> segment) const {
  return psi(n, logistic_state(spec_, segment, p));
}

FKModel make_logistic_model(const LogisticSpec& spec) {
  spec.validate();
  FKModel model;
  model.potential = std::make_shared<LogisticPotential>(spec);
  const std::size_t e = spec.num_states();
  double total = 0.0;
  for (double w : spec.weights) total += w;
  std::vector<double> row(e);
  for (std::size_t j = 0; j < e; ++j) row[j] = spec.weights[j] / total;
  model.kernel = MixingKernel::homogeneous(Matrix(e, row));
  model.zeta = state_measure(row, e);
  model.min_p = 1;
  return model;
}

LogisticConstantsReport logistic_constants(const LogisticSpec& spec) {
  spec.validate();
  LogisticConstantsReport r;
  r.l_prime = spec.l_prime();
  r.tau = std::abs(spec.rho);
  r.c = std::exp(r.l_prime);
  r.phi = std::expm1(2.0 * r.l_prime);
  r.E = r.phi > 0.0 ? 4.0 * spec.K * r.l_prime * r.c / (3.0 * r.phi) : 0.0;
  r.stable = r.tau * r.c * r.c * r.c < 1.0;
  const double a = 1.0 + std::exp(r.l_prime);
  const double b_raw = 1.0 / (1.0 + std::exp(-r.l_prime));
  r.clamped = b_raw < 1.0;
  const std::size_t horizon = spec.horizon();
  r.consts.a.assign(horizon + 1, a);
  r.consts.b.assign(horizon + 1, std::max(1.0, b_raw));
  r.consts.phi.assign(horizon + 1, r.phi);
  r.consts.phi[0] = 0.0;
  r.consts.eps.assign(horizon + 1, 1.0);
  r.consts.tau = r.tau;
  if (r.clamped) r.notes.emplace_back("b_n clamped to 1");
  if (!r.stable) r.notes.emplace_back("tau c^3 >= 1: stability conditions violated");
  return r;
}

double lipschitz_tail(double K, double bound, double tau, std::size_t p) {
  if (!(tau >= 0.0 && tau < 1.0)) throw FkError(ErrorKind::invalid_argument, "tau must lie in [0, 1)");
  return K * bound * std::pow(tau, static_cast<double>(p)) / (1.0 - tau);
}

std::vector<std::function<double(double)>> lipschitz_family(const LogisticSpec& spec,
                                                            std::size_t ramps, std::size_t phases) {
  std::vector<std::function<double(double)>> out;
  const double K = spec.K;
  const double lp = spec.l_prime();
  for (std::size_t i = 0; i < ramps; ++i) {
    const double a = ramps == 1 ? 0.0
                                : -lp + 2.0 * lp * static_cast<double>(i) /
                                            static_cast<double>(ramps - 1);
    out.emplace_back([K, a](double x) { return std::clamp(K * (x - a), -1.0, 1.0); });
  }
  for (std::size_t j = 0; j < phases; ++j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(phases);
    out.emplace_back([K, theta](double x) { return std::sin(K * x + theta); });
  }
  return out;
}

XErrorDecomposition x_filter_error_decomposition(const LogisticSpec& spec, std::size_t n,
                                                 std::size_t p, const PathMeasure& particle,
                                                 const PathMeasure& oracle) {
  const PathMeasure a = particle.normalized();
  const PathMeasure b = oracle.normalized();
  auto x_values = [&](const PathMeasure& mu) {
    std::vector<double> xs;
    xs.reserve(mu.size());
    for (const Path& path : mu.atoms()) {
      if (path.size() != n + 1) throw FkError(ErrorKind::dimension, "paths must have length n + 1");
      xs.push_back(logistic_state(spec, path, path.size()));
    }
    return xs;
  };
  const std::vector<double> xa = x_values(a);
  const std::vector<double> xb = x_values(b);

  XErrorDecomposition out;
  for (const auto& g : lipschitz_family(spec)) {
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += a.weight(i) * g(xa[i]);
    for (std::size_t i = 0; i < b.size(); ++i) diff -= b.weight(i) * g(xb[i]);
    out.x_error = std::max(out.x_error, std::abs(diff));
  }
  out.segment_error = tv_distance(project_last_p(a, p), project_last_p(b, p));
  out.tail = lipschitz_tail(spec.K, spec.l_prime(), std::abs(spec.rho), p);
  return out;
}

LogisticData simulate_logistic(const LogisticSpec& spec, std::size_t horizon, RandomSource& rng) {
  const FKModel model = make_logistic_model(spec);
  LogisticData out;
  out.path = sample_chain(model.zeta, model.kernel, horizon, rng);
  out.x.assign(horizon + 1, 0.0);
  out.y.assign(horizon + 1, 0.0);
  out.x[0] = spec.support[static_cast<std::size_t>(out.path[0])];
  for (std::size_t n = 1; n <= horizon; ++n) {
    out.x[n] = spec.rho * out.x[n - 1] + spec.support[static_cast<std::size_t>(out.path[n])];
    out.y[n] = rng.uniform() < 1.0 / (1.0 + std::exp(out.x[n])) ? 1.0 : -1.0;
  }
  return out;
}

}  // namespace fkpath
