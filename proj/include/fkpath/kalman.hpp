#ifndef FKPATH_KALMAN_HPP
#define FKPATH_KALMAN_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fkpath/bounds.hpp"
#include "fkpath/fk_core.hpp"

namespace fkpath {

/**
 * Mixture Kalman model. Given the regime path,
 *   X_0 = 0,  X_n = h(l_n) X_{n-1} + sqrt(w(l_n)) W_n,
 *   Y_n = X_n + sqrt(v(l_n)) V_n,
 * and the potential is the predictive density of y_n from the scalar
 * Kalman recursion.
 */
struct KalmanSpec {
  std::vector<double> h;
  std::vector<double> v;
  std::vector<double> w;
  Matrix transition;
  std::vector<double> initial;
  /// Truncation padding state; state 0 when unset.
  std::optional<State> padding;
  /// Observation cap C_y.
  double cap = 10.0;
  /// y[n] for n >= 1; y[0] is ignored.
  std::vector<double> y;

  std::size_t num_states() const { return h.size(); }
  std::size_t horizon() const { return y.empty() ? 0 : y.size() - 1; }
  void validate() const;
};

struct KalmanStep {
  double mu = 0.0;
  double sigma2 = 0.0;
  double gain = 0.0;
  double m = 0.0;
  double c = 0.0;
};

/// One recursion step from (m_{n-1}, c_{n-1}) with regime s and datum y.
KalmanStep kalman_update(const KalmanSpec& spec, State s, double y, double m, double c);

/// Runs the recursion along path[0..n] from m_0 = c_0 = 0 and returns the
/// time-n quantities; n = 0 gives m = c = 0 and mu = sigma2 = 0.
KalmanStep kalman_recursion(const KalmanSpec& spec, std::size_t n, std::span<const State> path);

class KalmanPotential final : public PathPotential {
 public:
  explicit KalmanPotential(KalmanSpec spec);

  double eval(std::size_t n, std::span<const State> path) const override;
  std::size_t stat_size() const override { return 2; }
  std::size_t required_memory() const override { return 1; }
  void init_stat(State first, std::span<double> stat) const override;
  double advance(std::size_t n, std::span<const State> tail, std::span<double> stat) const override;

  const KalmanSpec& spec() const { return spec_; }

 protected:
  /// Psi_n on (z, ..., z, segment), the recursion started at (0, 0).
  double truncated_impl(std::size_t n, std::size_t p,
                        std::span<const State> segment) const override;

 private:
  double y(std::size_t n) const;

  KalmanSpec spec_;
  State padding_ = 0;
  /// (m_t, c_t) along the all-padding path.
  std::vector<KalmanStep> padded_;
};

FKModel make_kalman_model(const KalmanSpec& spec);

struct KalmanBoxes {
  double v_lo, v_hi, w_lo, w_hi, h_hi;
  double sigma2_lo, sigma2_hi;
  /// Box for c_n, n >= 1.
  double c_lo, c_hi;
};
KalmanBoxes kalman_boxes(const KalmanSpec& spec);

/// 1 / (1 + w_lo/v_hi + 2 sqrt(w_lo/v_hi + w_lo^2/v_hi^2)).
double kalman_tau_sigma(double w_lo, double v_hi);

/// Upsilon(c, s) = -log(1/v(s) + 1/(h(s)^2 e^c + w(s))).
double kalman_upsilon(const KalmanSpec& spec, double log_c, State s);

struct KalmanConstantsReport {
  HypothesisConstants consts;
  KalmanBoxes boxes{};
  double tau_sigma = 0.0;
  double C_sigma = 0.0;
  double C_mu = 0.0;
  double a_bar = 0.0;
  double a_tilde = 0.0;
  /// a_bar h_bar / (1 - a_tilde h_bar), the |mu_n| / M_{n-1} bound.
  double kappa = 0.0;
  double tau = 0.0;
  double c = 0.0;
  double phi = 0.0;
  bool stable = false;
  bool feasible = true;
  bool clamped = false;
  std::vector<std::string> notes;
};

KalmanConstantsReport kalman_constants(const KalmanSpec& spec);

struct KalmanData {
  Path path;
  std::vector<double> x;
  std::vector<double> y;
  /// Fraction of step draws rejected because |y| exceeded the cap.
  double rejection_rate = 0.0;
};

/// Simulates the model, redrawing a step's noise while |y_n| > cap.
KalmanData simulate_kalman(const KalmanSpec& spec, std::size_t horizon, RandomSource& rng);

}  // namespace fkpath

#endif  // FKPATH_KALMAN_HPP
