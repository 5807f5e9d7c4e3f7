#ifndef FKPATH_LOGISTIC_HPP
#define FKPATH_LOGISTIC_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fkpath/bounds.hpp"
#include "fkpath/fk_core.hpp"

namespace fkpath {

/**
 * AR(1) state X_n = rho X_{n-1} + L_n, X_0 = L_0, with i.i.d. innovations L_n
 * on a finite support inside [-l, l], observed through binary
 * Y_n in {-1, 1}, P(Y_n = 1 | X_n) = 1 / (1 + e^{X_n}).
 *
 * The regime chain is the innovation sequence itself: state i stands for the
 * innovation value support[i], and every kernel row is the innovation law.
 */
struct LogisticSpec {
  double rho = 0.5;
  /// Innovation values; defaults to {-l, 0, l} via logistic_three_point().
  std::vector<double> support;
  std::vector<double> weights;
  /// Lipschitz constant of the test functions.
  double K = 1.0;
  /// y[n] in {-1, 1} for n >= 1; y[0] is ignored.
  std::vector<double> y;

  std::size_t num_states() const { return support.size(); }
  std::size_t horizon() const { return y.empty() ? 0 : y.size() - 1; }
  /// max |support|.
  double l() const;
  /// l / (1 - |rho|).
  double l_prime() const;
  void validate() const;
};

/// Innovation law on {-l, 0, l} with the given weights.
LogisticSpec logistic_three_point(double rho, double l, std::vector<double> weights, double K = 1.0);

/// x_n = sum_{k < lags} rho^k support[path[n-k]]; lags beyond the path are zero.
double logistic_state(const LogisticSpec& spec, std::span<const State> path, std::size_t lags);

class LogisticPotential final : public PathPotential {
 public:
  explicit LogisticPotential(LogisticSpec spec);

  double eval(std::size_t n, std::span<const State> path) const override;
  std::size_t stat_size() const override { return 1; }
  std::size_t required_memory() const override { return 1; }
  void init_stat(State first, std::span<double> stat) const override;
  double advance(std::size_t n, std::span<const State> tail, std::span<double> stat) const override;

 protected:
  /// Drops lags >= p.
  double truncated_impl(std::size_t n, std::size_t p,
                        std::span<const State> segment) const override;

 private:
  double psi(std::size_t n, double x) const;

  LogisticSpec spec_;
};

FKModel make_logistic_model(const LogisticSpec& spec);

struct LogisticConstantsReport {
  HypothesisConstants consts;
  double l_prime = 0.0;
  double tau = 0.0;
  /// e^{l'}.
  double c = 0.0;
  double phi = 0.0;
  /// 4 K l' c / (3 phi).
  double E = 0.0;
  bool stable = false;
  bool clamped = false;
  std::vector<std::string> notes;
};

LogisticConstantsReport logistic_constants(const LogisticSpec& spec);

/// K * bound * tau^p / (1 - tau), with 0^p = 0 for p >= 1.
double lipschitz_tail(double K, double bound, double tau, std::size_t p);

/// Bounded K-Lipschitz test functions of x: ramps clamp(K(x - a), -1, 1)
/// over a grid of a in [-l', l'] and sin(K x + theta) over phases.
std::vector<std::function<double(double)>> lipschitz_family(const LogisticSpec& spec,
                                                            std::size_t ramps = 41,
                                                            std::size_t phases = 16);

struct XErrorDecomposition {
  /// sup over the family of |<exact - particle, g(x_n)>|.
  double x_error = 0.0;
  /// TV distance of the H_n^p projections.
  double segment_error = 0.0;
  /// K l' tau^p / (1 - tau).
  double tail = 0.0;
  double total() const { return segment_error + tail; }
};

/// Compares two measures over full paths lambda_{0:n} through functions of
/// x_n and through their last-p projections.
XErrorDecomposition x_filter_error_decomposition(const LogisticSpec& spec, std::size_t n,
                                                 std::size_t p, const PathMeasure& particle,
                                                 const PathMeasure& oracle);

struct LogisticData {
  Path path;
  std::vector<double> x;
  std::vector<double> y;
};

LogisticData simulate_logistic(const LogisticSpec& spec, std::size_t horizon, RandomSource& rng);

}  // namespace fkpath

#endif  // FKPATH_LOGISTIC_HPP
