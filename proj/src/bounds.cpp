#include "fkpath/bounds.hpp"

#include <cmath>
#include <string>

#include "fkpath/error.hpp"

namespace fkpath {

HypothesisConstants HypothesisConstants::uniform(std::size_t horizon, double a, double b,
                                                 double phi, double eps, double tau) {
  HypothesisConstants c;
  c.a.assign(horizon + 1, a);
  c.b.assign(horizon + 1, b);
  c.phi.assign(horizon + 1, phi);
  c.eps.assign(horizon + 1, eps);
  c.tau = tau;
  return c;
}

void HypothesisConstants::validate() const {
  const std::size_t len = a.size();
  if (len == 0 || b.size() != len || phi.size() != len || eps.size() != len) {
    throw FkError(ErrorKind::dimension, "constant sequences must be nonempty and of equal length");
  }
  for (std::size_t n = 0; n < len; ++n) {
    if (!(a[n] >= 1.0) || !(b[n] >= 1.0)) {
      throw FkError(ErrorKind::invalid_argument, "a_n and b_n must be at least 1");
    }
    if (!(phi[n] >= 0.0)) throw FkError(ErrorKind::invalid_argument, "phi_n must be nonnegative");
    if (!(eps[n] > 0.0 && eps[n] <= 1.0)) {
      throw FkError(ErrorKind::invalid_argument, "eps_n must lie in (0, 1]");
    }
  }
  if (!(tau >= 0.0 && tau < 1.0)) throw FkError(ErrorKind::invalid_argument, "tau must lie in [0, 1)");
}

bool ConstantView::past(std::size_t m) const {
  if (m <= consts.horizon()) return false;
  if (consts.policy == HorizonPolicy::error) {
    throw FkError(ErrorKind::horizon_exceeded, "index " + std::to_string(m) + " beyond horizon " +
                                                   std::to_string(consts.horizon()));
  }
  extended = true;
  return true;
}

double ConstantView::a(std::size_t m) const { return past(m) ? 1.0 : consts.a[m]; }
double ConstantView::b(std::size_t m) const { return past(m) ? 1.0 : consts.b[m]; }
double ConstantView::phi(std::size_t m) const {
  return past(m) ? consts.phi.back() : consts.phi[m];
}
double ConstantView::eps(std::size_t m) const {
  return past(m) ? consts.eps.back() : consts.eps[m];
}

namespace {

double eps_sq(const ConstantView& v, std::size_t k, std::size_t p) {
  if (k < 1 || p < 1) throw FkError(ErrorKind::invalid_argument, "need k >= 1 and p >= 1");
  const double e = v.eps(k);
  double denom = 1.0;
  for (std::size_t m = k; m + 2 <= k + p; ++m) denom *= v.a(m) * v.b(m);
  return e * e / denom;
}

double rho(const ConstantView& v, std::size_t k, std::size_t p) {
  const double e2 = eps_sq(v, k, p);
  return (1.0 - e2) / (1.0 + e2);
}

/// prod_{j=first}^{floor((n-i)/p)-1} rho~_{i+jp+1,p}; empty products are 1.
double rho_product(const ConstantView& v, std::size_t n, std::size_t i, std::size_t p,
                   std::size_t first) {
  const std::size_t blocks = (n - i) / p;
  double prod = 1.0;
  for (std::size_t j = first; j + 1 <= blocks; ++j) prod *= rho(v, i + j * p + 1, p);
  return prod;
}

double tau_pow(double tau, std::size_t p) {
  return std::pow(tau, static_cast<double>(p));
}

}  // namespace

double tilde_epsilon_sq(const HypothesisConstants& consts, std::size_t k, std::size_t p,
                        bool* extended) {
  ConstantView v{consts};
  const double out = eps_sq(v, k, p);
  if (extended) *extended = v.extended;
  return out;
}

double tilde_rho(const HypothesisConstants& consts, std::size_t k, std::size_t p, bool* extended) {
  ConstantView v{consts};
  const double out = rho(v, k, p);
  if (extended) *extended = v.extended;
  return out;
}

TheoremBound theorem_bound(const HypothesisConstants& consts, std::size_t n, std::size_t p,
                           double N) {
  if (p < 1) throw FkError(ErrorKind::invalid_argument, "p must be positive");
  if (!(N >= 1.0)) throw FkError(ErrorKind::invalid_argument, "N must be at least 1");
  ConstantView v{consts};
  const double tp = tau_pow(consts.tau, p);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double delta = 3.0 * tp * v.phi(i) + 4.0 * v.a(i) * v.b(i) / std::sqrt(N);
    sum += delta / (eps_sq(v, i + 1, p) * eps_sq(v, i + p + 1, p)) * rho_product(v, n, i, p, 2);
  }
  TheoremBound out;
  out.value = 4.0 / std::log(3.0) * sum;
  out.vacuous = out.value > 2.0;
  out.extended = v.extended;
  return out;
}

TheoremBound tele2_bound(const HypothesisConstants& consts, std::size_t n, std::size_t p) {
  if (p < 1) throw FkError(ErrorKind::invalid_argument, "p must be positive");
  ConstantView v{consts};
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    sum += v.phi(i) / eps_sq(v, i + 1, p) * rho_product(v, n, i, p, 1);
  }
  TheoremBound out;
  out.value = 4.0 * tau_pow(consts.tau, p) / std::log(3.0) * sum;
  out.vacuous = out.value > 2.0;
  out.extended = v.extended;
  return out;
}

std::size_t choose_p(double c, double phi, double tau, double N, std::size_t min_p) {
  if (!(tau > 0.0 && tau < 1.0) || !(c >= 1.0) || !(phi > 0.0) || !(N >= 1.0)) {
    throw FkError(ErrorKind::invalid_argument, "choose_p needs 0 < tau < 1, c >= 1, phi > 0, N >= 1");
  }
  const double raw = std::ceil(std::log(4.0 * c / (3.0 * phi * std::sqrt(N))) / std::log(tau));
  if (!(raw >= static_cast<double>(min_p))) return min_p;
  return static_cast<std::size_t>(raw);
}

CorollaryBound corollary_bound(double c, double eps, double phi, double tau, double N) {
  if (!(tau > 0.0 && tau < 1.0) || !(c >= 1.0) || !(phi > 0.0) || !(eps > 0.0) || !(N >= 1.0)) {
    throw FkError(ErrorKind::invalid_argument, "corollary needs 0 < tau < 1, c >= 1, phi, eps > 0");
  }
  if (!(tau * c * c * c < 1.0)) {
    throw FkError(ErrorKind::stability_violated, "tau c^3 = " + std::to_string(tau * c * c * c));
  }
  const double ratio = std::log(c) / std::log(tau);
  CorollaryBound out;
  out.exponent = 1.0 + 3.0 * ratio;
  out.C = 16.0 / (std::pow(eps, 6.0) * c * c) * (-1.0 / std::log(tau)) *
          std::pow(4.0 * c / (3.0 * phi), 3.0 * ratio);
  out.D = 2.0 * std::log(3.0 * phi / (4.0 * c * tau));
  out.value = out.C * (std::log(N) + out.D) * std::pow(N, -out.exponent / 2.0);
  return out;
}

double corollary_majorant(double c, double eps, double phi, double tau, double N, std::size_t p) {
  const double pp = static_cast<double>(p);
  return 4.0 * std::pow(c, 3.0 * (pp - 2.0)) / std::pow(eps, 6.0) *
         (3.0 * phi * std::pow(tau, pp) + 4.0 * c / std::sqrt(N)) * pp;
}

}  // namespace fkpath
