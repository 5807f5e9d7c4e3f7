#ifndef FKPATH_GARCH_HPP
#define FKPATH_GARCH_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fkpath/bounds.hpp"
#include "fkpath/fk_core.hpp"

namespace fkpath {

/**
 * Regime-switching GARCH: Y_n = sigma_n Z_n with
 *   sigma_n^2 = alpha(l_n) + beta(l_n) y_n^2 + gamma(l_n) sigma_{n-1}^2,
 *   sigma_0^2 = alpha(l_0) / (1 - gamma(l_0)).
 * Coefficients are given per state of E = {0, ..., |E|-1}.
 */
struct GarchSpec {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
  Matrix transition;
  /// Initial law; uniform when empty.
  std::vector<double> initial;
  /// Truncation padding state; see garch_default_padding().
  std::optional<State> padding;
  /// y[n] for n >= 1; y[0] is ignored.
  std::vector<double> y;

  std::size_t num_states() const { return alpha.size(); }
  std::size_t horizon() const { return y.empty() ? 0 : y.size() - 1; }
  void validate() const;
};

enum class GarchMode { beta_zero, general };

/// The state whose stationary variance alpha/(1-gamma) is closest to the
/// midpoint of [sigma_min^2, sigma_max^2].
State garch_default_padding(const GarchSpec& spec);

double garch_variance(const GarchSpec& spec, std::span<const State> path);

/// N(0, sigma2) density at y.
double gaussian_density(double y, double sigma2);

class GarchPotential final : public PathPotential {
 public:
  explicit GarchPotential(GarchSpec spec);

  double eval(std::size_t n, std::span<const State> path) const override;
  std::size_t stat_size() const override { return 1; }
  std::size_t required_memory() const override { return 1; }
  void init_stat(State first, std::span<double> stat) const override;
  double advance(std::size_t n, std::span<const State> tail, std::span<double> stat) const override;

  const GarchSpec& spec() const { return spec_; }
  State padding() const { return padding_; }

 protected:
  double truncated_impl(std::size_t n, std::size_t p,
                        std::span<const State> segment) const override;

 private:
  double step(std::size_t n, State s, double prev) const;
  double y(std::size_t n) const;

  GarchSpec spec_;
  State padding_ = 0;
  /// Variance along the all-padding path, by time.
  std::vector<double> padded_variance_;
};

FKModel make_garch_model(const GarchSpec& spec);

/// iota = alpha_max (1 - gamma_min) / (alpha_min (1 - gamma_max)).
double garch_iota(double alpha_min, double alpha_max, double gamma_min, double gamma_max);
/// theta = max(alpha_max / alpha_min, beta_max / beta_min).
double garch_theta(double alpha_min, double alpha_max, double beta_min, double beta_max);
/// (2 / ratio - 1)^{-1/2}; infinite when ratio >= 2.
double garch_c(double ratio);
/// tau^{-q} [exp(tau^q r) (1 - 2 tau^q r^2)^{-1/2} - 1], the bound on the
/// conditional mean of phi_n; infinite when the square root is undefined.
double garch_expected_phi(double ratio, double tau, std::size_t q);

struct GarchConstantsReport {
  GarchMode mode = GarchMode::beta_zero;
  HypothesisConstants consts;
  std::size_t q = 1;
  double sigma_min2 = 0.0;
  double sigma_max2 = 0.0;
  /// iota in beta_zero mode, theta in general mode.
  double ratio = 0.0;
  double c = 0.0;
  double tau = 0.0;
  /// Expected-phi constant for the corollary at depth q.
  double phi = 0.0;
  bool ratio_feasible = false;
  bool stable = false;
  bool clamped = false;
  std::vector<std::string> notes;
};

/// Per-step constants for truncation depth q, plus the expected constants
/// (ratio, c, tau, phi) entering the time-uniform stability check.
GarchConstantsReport garch_constants(const GarchSpec& spec, GarchMode mode, std::size_t q);

/// Smallest p >= min_p with choose_p(c, phi(p), tau, N) <= p, where phi(p)
/// is the expected phi at q = p; nullopt when c is not finite or tau = 0.
std::optional<std::size_t> garch_auto_p(const GarchSpec& spec, GarchMode mode, double N,
                                        std::size_t min_p = 1);

struct GarchData {
  Path path;
  /// y[0] = 0, y[n] for n >= 1.
  std::vector<double> y;
};

/// Draws the regime chain and observations. With beta > 0 the variance uses
/// the lagged square y_{n-1}^2 so the draw is well defined.
GarchData simulate_garch(const GarchSpec& spec, std::size_t horizon, RandomSource& rng);

/// sigma^2_min(n), sigma^2_max(n) of the constant-gamma proof.
std::pair<double, double> garch_general_variance_bounds(const GarchSpec& spec, std::size_t n);

}  // namespace fkpath

#endif  // FKPATH_GARCH_HPP
