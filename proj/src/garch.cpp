#include "fkpath/garch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fkpath {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Range {
  double lo;
  double hi;
};

Range range_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

/// tau^{-q} expm1(tau^q k), with its limit k at tau = 0.
double scaled_expm1(double tau, std::size_t q, double k) {
  const double tq = std::pow(tau, static_cast<double>(q));
  if (tq == 0.0) return k;
  return std::expm1(tq * k) / tq;
}

}  // namespace

void GarchSpec::validate() const {
  const std::size_t e = alpha.size();
  if (e == 0) throw FkError(ErrorKind::invalid_argument, "GARCH needs at least one state");
  if (beta.size() != e || gamma.size() != e) {
    throw FkError(ErrorKind::dimension, "alpha, beta, gamma must have one entry per state");
  }
  for (std::size_t i = 0; i < e; ++i) {
    if (!(alpha[i] > 0.0)) throw FkError(ErrorKind::invalid_argument, "alpha must be positive");
    if (!(beta[i] >= 0.0 && beta[i] < 1.0)) {
      throw FkError(ErrorKind::invalid_argument, "beta must lie in [0, 1)");
    }
    if (!(gamma[i] >= 0.0 && gamma[i] < 1.0)) {
      throw FkError(ErrorKind::invalid_argument, "gamma must lie in [0, 1)");
    }
  }
  if (transition.size() != e) throw FkError(ErrorKind::dimension, "transition must be |E| x |E|");
  if (!initial.empty() && initial.size() != e) {
    throw FkError(ErrorKind::dimension, "initial law must have one weight per state");
  }
  if (padding && (*padding < 0 || static_cast<std::size_t>(*padding) >= e)) {
    throw FkError(ErrorKind::invalid_argument, "padding state out of range");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw FkError(ErrorKind::invalid_argument, "observations must be finite");
  }
}

State garch_default_padding(const GarchSpec& spec) {
  const Range a = range_of(spec.alpha);
  const Range g = range_of(spec.gamma);
  const double mid = 0.5 * (a.lo / (1.0 - g.lo) + a.hi / (1.0 - g.hi));
  State best = 0;
  double best_gap = kInf;
  for (std::size_t i = 0; i < spec.num_states(); ++i) {
    const double gap = std::abs(spec.alpha[i] / (1.0 - spec.gamma[i]) - mid);
    if (gap < best_gap) {
      best_gap = gap;
      best = static_cast<State>(i);
    }
  }
  return best;
}

double gaussian_density(double y, double sigma2) {
  return std::exp(-y * y / (2.0 * sigma2)) / std::sqrt(2.0 * std::numbers::pi * sigma2);
}

double garch_variance(const GarchSpec& spec, std::span<const State> path) {
  if (path.empty()) throw FkError(ErrorKind::dimension, "empty path");
  const auto s0 = static_cast<std::size_t>(path[0]);
  double var = spec.alpha[s0] / (1.0 - spec.gamma[s0]);
  for (std::size_t n = 1; n < path.size(); ++n) {
    const auto s = static_cast<std::size_t>(path[n]);
    double obs = 0.0;
    if (spec.beta[s] != 0.0) {
      if (n >= spec.y.size()) throw FkError(ErrorKind::horizon_exceeded, "no observation at time n");
      obs = spec.beta[s] * spec.y[n] * spec.y[n];
    }
    var = spec.alpha[s] + obs + spec.gamma[s] * var;
  }
  return var;
}

GarchPotential::GarchPotential(GarchSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  padding_ = spec_.padding.value_or(garch_default_padding(spec_));
  const std::size_t horizon = spec_.horizon();
  padded_variance_.resize(horizon + 1);
  const auto z = static_cast<std::size_t>(padding_);
  padded_variance_[0] = spec_.alpha[z] / (1.0 - spec_.gamma[z]);
  for (std::size_t n = 1; n <= horizon; ++n) {
    padded_variance_[n] = step(n, padding_, padded_variance_[n - 1]);
  }
}

double GarchPotential::y(std::size_t n) const {
  if (n == 0 || n >= spec_.y.size()) {
    throw FkError(ErrorKind::horizon_exceeded, "no observation at time " + std::to_string(n));
  }
  return spec_.y[n];
}

double GarchPotential::step(std::size_t n, State s, double prev) const {
  const auto i = static_cast<std::size_t>(s);
  const double obs = spec_.beta[i] == 0.0 ? 0.0 : spec_.beta[i] * y(n) * y(n);
  return spec_.alpha[i] + obs + spec_.gamma[i] * prev;
}

double GarchPotential::eval(std::size_t n, std::span<const State> path) const {
  if (path.size() != n + 1) throw FkError(ErrorKind::dimension, "path length must be n + 1");
  return gaussian_density(y(n), garch_variance(spec_, path));
}

void GarchPotential::init_stat(State first, std::span<double> stat) const {
  const auto i = static_cast<std::size_t>(first);
  stat[0] = spec_.alpha[i] / (1.0 - spec_.gamma[i]);
}

double GarchPotential::advance(std::size_t n, std::span<const State> tail,
                               std::span<double> stat) const {
  stat[0] = step(n, tail.back(), stat[0]);
  return gaussian_density(y(n), stat[0]);
}

double GarchPotential::truncated_impl(std::size_t n, std::size_t p,
                                      std::span<const State> segment) const {
  double var = padded_variance_.at(n - p);
  for (std::size_t j = 0; j < p; ++j) var = step(n - p + 1 + j, segment[j], var);
  return gaussian_density(y(n), var);
}

FKModel make_garch_model(const GarchSpec& spec) {
  FKModel model;
  auto potential = std::make_shared<GarchPotential>(spec);
  model.kernel = MixingKernel::homogeneous(spec.transition);
  if (model.kernel.num_states() != spec.num_states()) {
    throw FkError(ErrorKind::dimension, "transition size differs from the number of states");
  }
  model.zeta = state_measure(spec.initial, spec.num_states());
  model.potential = std::move(potential);
  model.min_p = 1;
  return model;
}

double garch_iota(double alpha_min, double alpha_max, double gamma_min, double gamma_max) {
  return alpha_max * (1.0 - gamma_min) / (alpha_min * (1.0 - gamma_max));
}

double garch_theta(double alpha_min, double alpha_max, double beta_min, double beta_max) {
  const double beta_ratio = beta_min > 0.0 ? beta_max / beta_min : (beta_max > 0.0 ? kInf : 1.0);
  return std::max(alpha_max / alpha_min, beta_ratio);
}

double garch_c(double ratio) {
  if (!(ratio < 2.0)) return kInf;
  return 1.0 / std::sqrt(2.0 / ratio - 1.0);
}

double garch_expected_phi(double ratio, double tau, std::size_t q) {
  const double tq = std::pow(tau, static_cast<double>(q));
  const double inner = 1.0 - 2.0 * tq * ratio * ratio;
  if (!(inner > 0.0) || !std::isfinite(ratio)) return kInf;
  if (tq == 0.0) return ratio + ratio * ratio;
  return (std::exp(tq * ratio) / std::sqrt(inner) - 1.0) / tq;
}

std::pair<double, double> garch_general_variance_bounds(const GarchSpec& spec, std::size_t n) {
  const Range a = range_of(spec.alpha);
  const Range b = range_of(spec.beta);
  const double g = spec.gamma.front();
  const double gn = std::pow(g, static_cast<double>(n));
  double lo = gn / (1.0 - g) * a.lo;
  double hi = gn / (1.0 - g) * a.hi;
  double gk = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double y2 = spec.y.at(n - k) * spec.y.at(n - k);
    lo += (a.lo + b.lo * y2) * gk;
    hi += (a.hi + b.hi * y2) * gk;
    gk *= g;
  }
  return {lo, hi};
}

GarchConstantsReport garch_constants(const GarchSpec& spec, GarchMode mode, std::size_t q) {
  spec.validate();
  if (q == 0) throw FkError(ErrorKind::invalid_argument, "q must be positive");
  const Range a = range_of(spec.alpha);
  const Range b = range_of(spec.beta);
  const Range g = range_of(spec.gamma);
  const MixingKernel kernel = MixingKernel::homogeneous(spec.transition);
  const std::size_t horizon = spec.horizon();

  GarchConstantsReport r;
  r.mode = mode;
  r.q = q;
  auto& k = r.consts;
  k.a.assign(horizon + 1, 1.0);
  k.b.assign(horizon + 1, 1.0);
  k.phi.assign(horizon + 1, 0.0);
  k.eps.assign(horizon + 1, kernel.epsilon(1));

  auto set_ab = [&](std::size_t n, double lo2, double hi2) {
    const double y2 = spec.y[n] * spec.y[n];
    const double a_raw = std::sqrt(2.0 * std::numbers::pi * hi2) * std::exp(y2 / (2.0 * lo2));
    const double b_raw = std::exp(-y2 / (2.0 * hi2)) / std::sqrt(2.0 * std::numbers::pi * lo2);
    if (a_raw < 1.0 || b_raw < 1.0) r.clamped = true;
    k.a[n] = std::max(1.0, a_raw);
    k.b[n] = std::max(1.0, b_raw);
  };

  if (mode == GarchMode::beta_zero) {
    if (b.hi != 0.0) throw FkError(ErrorKind::invalid_argument, "beta_zero mode needs beta = 0");
    r.sigma_min2 = a.lo / (1.0 - g.lo);
    r.sigma_max2 = a.hi / (1.0 - g.hi);
    r.tau = g.hi;
    r.ratio = garch_iota(a.lo, a.hi, g.lo, g.hi);
    for (std::size_t n = 1; n <= horizon; ++n) {
      set_ab(n, r.sigma_min2, r.sigma_max2);
      const double y2 = spec.y[n] * spec.y[n];
      k.phi[n] = scaled_expm1(r.tau, q,
                              r.sigma_max2 * (r.sigma_min2 + y2) / (r.sigma_min2 * r.sigma_min2));
    }
  } else {
    if (g.lo != g.hi) {
      throw FkError(ErrorKind::invalid_argument, "general mode needs a constant gamma");
    }
    r.tau = g.hi;
    r.ratio = garch_theta(a.lo, a.hi, b.lo, b.hi);
    r.sigma_min2 = a.lo / (1.0 - g.lo);
    r.sigma_max2 = a.hi / (1.0 - g.hi);
    for (std::size_t n = 1; n <= horizon; ++n) {
      const auto [lo2, hi2] = garch_general_variance_bounds(spec, n);
      set_ab(n, lo2, hi2);
      const double y2 = spec.y[n] * spec.y[n];
      const double lag_hi = garch_general_variance_bounds(spec, n >= q ? n - q : 0).second;
      k.phi[n] = scaled_expm1(r.tau, q, lag_hi * (lo2 + y2) / (lo2 * lo2));
    }
  }
  k.tau = r.tau;
  r.c = garch_c(r.ratio);
  r.phi = garch_expected_phi(r.ratio, r.tau, q);
  r.ratio_feasible = r.ratio < 2.0;
  r.stable = std::isfinite(r.c) && r.tau * r.c * r.c * r.c < 1.0;
  if (!r.ratio_feasible) {
    r.notes.emplace_back(std::string(mode == GarchMode::beta_zero ? "iota" : "theta") +
                         " >= 2: stability conditions violated");
  }
  if (r.ratio_feasible && !r.stable) r.notes.emplace_back("tau c^3 >= 1: stability conditions violated");
  if (r.clamped) r.notes.emplace_back("a_n or b_n clamped to 1");
  return r;
}

std::optional<std::size_t> garch_auto_p(const GarchSpec& spec, GarchMode mode, double N,
                                        std::size_t min_p) {
  const Range a = range_of(spec.alpha);
  const Range b = range_of(spec.beta);
  const Range g = range_of(spec.gamma);
  const double ratio = mode == GarchMode::beta_zero ? garch_iota(a.lo, a.hi, g.lo, g.hi)
                                                    : garch_theta(a.lo, a.hi, b.lo, b.hi);
  const double c = garch_c(ratio);
  const double tau = g.hi;
  if (!std::isfinite(c) || !(tau > 0.0)) return std::nullopt;
  for (std::size_t p = std::max<std::size_t>(min_p, 1); p < min_p + 1000; ++p) {
    const double phi = garch_expected_phi(ratio, tau, p);
    if (std::isfinite(phi) && choose_p(c, phi, tau, N, min_p) <= p) return p;
  }
  return std::nullopt;
}

GarchData simulate_garch(const GarchSpec& spec, std::size_t horizon, RandomSource& rng) {
  spec.validate();
  const MixingKernel kernel = MixingKernel::homogeneous(spec.transition);
  GarchData out;
  out.path = sample_chain(state_measure(spec.initial, spec.num_states()), kernel, horizon, rng);
  out.y.assign(horizon + 1, 0.0);
  const auto s0 = static_cast<std::size_t>(out.path[0]);
  double var = spec.alpha[s0] / (1.0 - spec.gamma[s0]);
  for (std::size_t n = 1; n <= horizon; ++n) {
    const auto s = static_cast<std::size_t>(out.path[n]);
    var = spec.alpha[s] + spec.beta[s] * out.y[n - 1] * out.y[n - 1] + spec.gamma[s] * var;
    out.y[n] = std::sqrt(var) * rng.normal();
  }
  return out;
}

}  // namespace fkpath
