#include "fkpath/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fkpath/garch.hpp"

namespace fkpath {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void KalmanSpec::validate() const {
  const std::size_t e = h.size();
  if (e == 0) throw FkError(ErrorKind::invalid_argument, "Kalman model needs at least one state");
  if (v.size() != e || w.size() != e) {
    throw FkError(ErrorKind::dimension, "h, v, w must have one entry per state");
  }
  for (std::size_t i = 0; i < e; ++i) {
    if (!(std::abs(h[i]) < 1.0)) throw FkError(ErrorKind::invalid_argument, "|h| must be below 1");
    if (!(v[i] > 0.0) || !(w[i] > 0.0)) {
      throw FkError(ErrorKind::invalid_argument, "v and w must be positive");
    }
  }
  if (transition.size() != e) throw FkError(ErrorKind::dimension, "transition must be |E| x |E|");
  if (!(cap > 0.0)) throw FkError(ErrorKind::invalid_argument, "observation cap must be positive");
  if (padding && (*padding < 0 || static_cast<std::size_t>(*padding) >= e)) {
    throw FkError(ErrorKind::invalid_argument, "padding state out of range");
  }
}

KalmanStep kalman_update(const KalmanSpec& spec, State s, double y, double m, double c) {
  const auto i = static_cast<std::size_t>(s);
  const double h = spec.h[i];
  const double prior = h * h * c + spec.w[i];
  KalmanStep out;
  out.mu = h * m;
  out.sigma2 = prior + spec.v[i];
  out.gain = prior / out.sigma2;
  out.m = h * m + out.gain * (y - out.mu);
  out.c = prior - out.gain * out.gain * out.sigma2;
  return out;
}

KalmanStep kalman_recursion(const KalmanSpec& spec, std::size_t n, std::span<const State> path) {
  if (path.size() < n + 1) throw FkError(ErrorKind::dimension, "path shorter than n + 1");
  KalmanStep st;
  for (std::size_t t = 1; t <= n; ++t) {
    if (t >= spec.y.size()) throw FkError(ErrorKind::horizon_exceeded, "no observation at time t");
    st = kalman_update(spec, path[t], spec.y[t], st.m, st.c);
  }
  return st;
}

KalmanPotential::KalmanPotential(KalmanSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  padding_ = spec_.padding.value_or(State{0});
  padded_.resize(spec_.horizon() + 1);
  for (std::size_t t = 1; t <= spec_.horizon(); ++t) {
    padded_[t] = kalman_update(spec_, padding_, spec_.y[t], padded_[t - 1].m, padded_[t - 1].c);
  }
}

double KalmanPotential::y(std::size_t n) const {
  if (n == 0 || n >= spec_.y.size()) {
    throw FkError(ErrorKind::horizon_exceeded, "no observation at time " + std::to_string(n));
  }
  return spec_.y[n];
}

double KalmanPotential::eval(std::size_t n, std::span<const State> path) const {
  if (path.size() != n + 1) throw FkError(ErrorKind::dimension, "path length must be n + 1");
  const KalmanStep st = kalman_recursion(spec_, n, path);
  return gaussian_density(y(n) - st.mu, st.sigma2);
}

void KalmanPotential::init_stat(State, std::span<double> stat) const {
  stat[0] = 0.0;
  stat[1] = 0.0;
}

double KalmanPotential::advance(std::size_t n, std::span<const State> tail,
                                std::span<double> stat) const {
  const KalmanStep st = kalman_update(spec_, tail.back(), y(n), stat[0], stat[1]);
  stat[0] = st.m;
  stat[1] = st.c;
  return gaussian_density(y(n) - st.mu, st.sigma2);
}

double KalmanPotential::truncated_impl(std::size_t n, std::size_t p,
                                       std::span<const State> segment) const {
  KalmanStep st = padded_.at(n - p);
  for (std::size_t j = 0; j < p; ++j) {
    st = kalman_update(spec_, segment[j], y(n - p + 1 + j), st.m, st.c);
  }
  return gaussian_density(y(n) - st.mu, st.sigma2);
}

FKModel make_kalman_model(const KalmanSpec& spec) {
  FKModel model;
  model.potential = std::make_shared<KalmanPotential>(spec);
  model.kernel = MixingKernel::homogeneous(spec.transition);
  model.zeta = state_measure(spec.initial, spec.num_states());
  model.min_p = 1;
  return model;
}

KalmanBoxes kalman_boxes(const KalmanSpec& spec) {
  KalmanBoxes b{};
  b.v_lo = *std::min_element(spec.v.begin(), spec.v.end());
  b.v_hi = *std::max_element(spec.v.begin(), spec.v.end());
  b.w_lo = *std::min_element(spec.w.begin(), spec.w.end());
  b.w_hi = *std::max_element(spec.w.begin(), spec.w.end());
  b.h_hi = 0.0;
  for (double h : spec.h) b.h_hi = std::max(b.h_hi, std::abs(h));
  b.sigma2_lo = b.v_lo + b.w_lo;
  b.sigma2_hi = (b.h_hi * b.h_hi + 1.0) * b.v_hi + b.w_hi;
  // 1/c_n = 1/v + 1/(h^2 c_{n-1} + w) is at most 1/v_lo + 1/w_lo.
  b.c_lo = 1.0 / (1.0 / b.v_lo + 1.0 / b.w_lo);
  b.c_hi = b.v_hi;
  return b;
}

double kalman_tau_sigma(double w_lo, double v_hi) {
  const double r = w_lo / v_hi;
  return 1.0 / (1.0 + r + 2.0 * std::sqrt(r + r * r));
}

double kalman_upsilon(const KalmanSpec& spec, double log_c, State s) {
  const auto i = static_cast<std::size_t>(s);
  return -std::log(1.0 / spec.v[i] + 1.0 / (spec.h[i] * spec.h[i] * std::exp(log_c) + spec.w[i]));
}

KalmanConstantsReport kalman_constants(const KalmanSpec& spec) {
  spec.validate();
  KalmanConstantsReport r;
  r.boxes = kalman_boxes(spec);
  const KalmanBoxes& b = r.boxes;
  const double h = b.h_hi;
  const double s2_lo = b.sigma2_lo;
  const double s4_lo = s2_lo * s2_lo;

  r.tau_sigma = kalman_tau_sigma(b.w_lo, b.v_hi);
  r.C_sigma = h * h * b.v_hi / r.tau_sigma;
  r.a_bar = 1.0 - b.v_lo / (h * h * b.v_hi + b.w_hi + b.v_lo);
  r.a_tilde = b.v_hi / (b.v_hi + b.w_lo);
  r.kappa = r.a_bar * h / (1.0 - r.a_tilde * h);
  r.tau = std::max(h, r.tau_sigma);

  // Majorant of tau_sigma^{p-1} sum_{i=1}^p h^i (tau_sigma^{-i} - 1) / (tau_sigma^{-1} - 1)
  // by C tau^p, uniformly in p.
  const double ts = r.tau_sigma;
  const double lead = b.v_hi * r.C_sigma / s4_lo;
  double series = 0.0;
  if (h == 0.0) {
    series = 0.0;
  } else if (h < ts) {
    const double ratio = h / ts;
    series = (ratio / (1.0 - ratio) - h / (1.0 - h)) / (1.0 / ts - 1.0) / ts;
  } else if (h > ts) {
    series = 1.0 / ((1.0 / ts - 1.0) * ts * (1.0 - ts / h));
  } else {
    series = kInf;
    r.feasible = false;
    r.notes.emplace_back("h_bar equals tau_sigma: no finite C_mu");
  }
  r.C_mu = lead * series + (h == 0.0 ? 0.0 : 2.0 * h / r.tau);

  const double cy2 = spec.cap * spec.cap;
  const double spread = cy2 / s2_lo * (1.0 + r.kappa * r.kappa);
  r.c = std::sqrt(b.sigma2_hi / s2_lo) * std::exp(spread);
  r.phi = std::expm1(r.C_sigma / (2.0 * s2_lo) + r.C_mu * cy2 / s2_lo * (1.0 + r.kappa) +
                     cy2 * r.C_sigma / s4_lo * (1.0 + r.kappa * r.kappa));
  r.stable = r.feasible && r.tau * r.c * r.c * r.c < 1.0;

  const double a_raw = std::sqrt(2.0 * std::numbers::pi * b.sigma2_hi) * std::exp(spread);
  const double b_raw = 1.0 / std::sqrt(2.0 * std::numbers::pi * s2_lo);
  r.clamped = a_raw < 1.0 || b_raw < 1.0;
  const MixingKernel kernel = MixingKernel::homogeneous(spec.transition);
  const std::size_t horizon = spec.horizon();
  r.consts.a.assign(horizon + 1, std::max(1.0, a_raw));
  r.consts.b.assign(horizon + 1, std::max(1.0, b_raw));
  r.consts.phi.assign(horizon + 1, std::isfinite(r.phi) ? r.phi : kInf);
  r.consts.phi[0] = 0.0;
  r.consts.eps.assign(horizon + 1, kernel.epsilon(1));
  r.consts.tau = r.tau;
  if (r.clamped) r.notes.emplace_back("a_n or b_n clamped to 1");
  if (r.feasible && !r.stable) r.notes.emplace_back("tau c^3 >= 1: stability conditions violated");
  return r;
}

KalmanData simulate_kalman(const KalmanSpec& spec, std::size_t horizon, RandomSource& rng) {
  spec.validate();
  const MixingKernel kernel = MixingKernel::homogeneous(spec.transition);
  KalmanData out;
  out.path = sample_chain(state_measure(spec.initial, spec.num_states()), kernel, horizon, rng);
  out.x.assign(horizon + 1, 0.0);
  out.y.assign(horizon + 1, 0.0);
  std::size_t draws = 0;
  std::size_t rejected = 0;
  for (std::size_t n = 1; n <= horizon; ++n) {
    const auto s = static_cast<std::size_t>(out.path[n]);
    for (;;) {
      ++draws;
      const double x = spec.h[s] * out.x[n - 1] + std::sqrt(spec.w[s]) * rng.normal();
      const double y = x + std::sqrt(spec.v[s]) * rng.normal();
      if (std::abs(y) <= spec.cap) {
        out.x[n] = x;
        out.y[n] = y;
        break;
      }
      ++rejected;
      if (draws > 1000 * (horizon + 1)) {
        throw FkError(ErrorKind::invalid_argument, "observation cap rejects almost every draw");
      }
    }
  }
  out.rejection_rate = draws == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(draws);
  return out;
}

}  // namespace fkpath
