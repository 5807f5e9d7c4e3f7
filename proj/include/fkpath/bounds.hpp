#ifndef FKPATH_BOUNDS_HPP
#define FKPATH_BOUNDS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fkpath/error.hpp"

namespace fkpath {

/// What to do when a bound reads a constant past the stored horizon.
enum class HorizonPolicy {
  /// a_m = b_m = 1, phi_m = phi_last, eps_m = eps_last for m beyond the
  /// horizon; the evaluation records that it extended.
  extend,
  /// Throw "horizon exceeded".
  error,
};

/**
 * Per-step hypothesis constants indexed by time n = 0, ..., horizon.
 * Index 0 is stored for convenience; bounds only read n >= 1.
 */
struct HypothesisConstants {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> phi;
  std::vector<double> eps;
  double tau = 0.0;
  HorizonPolicy policy = HorizonPolicy::extend;

  /// Uniform constants for n = 0, ..., horizon.
  static HypothesisConstants uniform(std::size_t horizon, double a, double b, double phi,
                                     double eps, double tau);

  std::size_t horizon() const { return a.empty() ? 0 : a.size() - 1; }
  void validate() const;
};

/// Accessors that apply the horizon policy; `extended` is set when they do.
struct ConstantView {
  const HypothesisConstants& consts;
  mutable bool extended = false;

  double a(std::size_t m) const;
  double b(std::size_t m) const;
  double phi(std::size_t m) const;
  double eps(std::size_t m) const;

 private:
  bool past(std::size_t m) const;
};

double tilde_epsilon_sq(const HypothesisConstants& consts, std::size_t k, std::size_t p,
                        bool* extended = nullptr);
double tilde_rho(const HypothesisConstants& consts, std::size_t k, std::size_t p,
                 bool* extended = nullptr);

struct TheoremBound {
  double value = 0.0;
  /// Value larger than the TV diameter 2.
  bool vacuous = false;
  bool extended = false;
};

/// (4/log 3) sum_i delta_i / (eps~2_{i+1,p} eps~2_{i+p+1,p})
///   prod_{j=2}^{floor((n-i)/p)-1} rho~_{i+jp+1,p},
/// delta_i = 3 tau^p phi_i + 4 a_i b_i / sqrt(N).
TheoremBound theorem_bound(const HypothesisConstants& consts, std::size_t n, std::size_t p,
                           double N);

/// Deterministic truncation bound
/// (4 tau^p / log 3) sum_i phi_i / eps~2_{i+1,p} prod_{j=1}^{floor((n-i)/p)-1} rho~_{i+jp+1,p}.
TheoremBound tele2_bound(const HypothesisConstants& consts, std::size_t n, std::size_t p);

/// ceil(log(4c / (3 phi sqrt N)) / log tau), floored at min_p.
std::size_t choose_p(double c, double phi, double tau, double N, std::size_t min_p = 1);

struct CorollaryBound {
  double C = 0.0;
  double D = 0.0;
  double exponent = 0.0;
  double value = 0.0;
};

/// Time-uniform bound C (log N + D) N^{-exponent/2}; throws
/// "stability condition violated" unless tau c^3 < 1.
CorollaryBound corollary_bound(double c, double eps, double phi, double tau, double N);

/// Majorant from the corollary's proof for uniform constants:
/// 4 c^{3(p-2)} eps^{-6} (3 phi tau^p + 4c / sqrt N) p.
double corollary_majorant(double c, double eps, double phi, double tau, double N, std::size_t p);

struct BoundReport {
  std::optional<double> theorem_bound;
  std::optional<double> corollary_bound;
  std::optional<double> tele2_bound;
  std::size_t chosen_p = 1;
  double C = 0.0;
  double D = 0.0;
  double exponent = 0.0;
  double c = 0.0;
  double phi = 0.0;
  double eps = 0.0;
  double tau = 0.0;
  /// tau c^3 < 1.
  bool stable = false;
  /// iota (or theta) < 2 where the model defines one.
  std::optional<bool> ratio_feasible;
  bool vacuous = false;
  bool extended = false;
  std::vector<std::string> notes;
};

}  // namespace fkpath

#endif  // FKPATH_BOUNDS_HPP
