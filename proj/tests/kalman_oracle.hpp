#ifndef FKPATH_KALMAN_ORACLE_HPP
#define FKPATH_KALMAN_ORACLE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <span>

#include "fkpath/kalman.hpp"

namespace fkpath::testing {

// log p(y_1..y_n | path) from the joint Gaussian of (X_1..X_n, Y_1..Y_n),
// built directly from X_k = sum_{j <= k} (prod_{i=j+1}^k h_i) sqrt(w_j) W_j.
inline double joint_log_likelihood(const KalmanSpec& spec, std::span<const State> path,
                                   std::size_t n) {
  if (n == 0) return 0.0;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    double coef = 1.0;
    for (std::size_t j = k + 1; j-- > 0;) {
      A(k, j) = coef;
      coef *= spec.h[static_cast<std::size_t>(path[j + 1])];
    }
  }
  Eigen::VectorXd w(n);
  Eigen::VectorXd v(n);
  Eigen::VectorXd y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto s = static_cast<std::size_t>(path[k + 1]);
    w(k) = spec.w[s];
    v(k) = spec.v[s];
    y(k) = spec.y[k + 1];
  }
  Eigen::MatrixXd cov = A * w.asDiagonal() * A.transpose();
  cov.diagonal() += v;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd z = llt.matrixL().solve(y);
  double logdet = 0.0;
  for (std::size_t k = 0; k < n; ++k) logdet += 2.0 * std::log(llt.matrixL()(k, k));
  return -0.5 * (z.squaredNorm() + logdet + double(n) * std::log(2.0 * std::numbers::pi));
}

// Psi_n as the ratio of consecutive joint likelihoods.
inline double joint_potential(const KalmanSpec& spec, std::span<const State> path, std::size_t n) {
  return std::exp(joint_log_likelihood(spec, path, n) - joint_log_likelihood(spec, path, n - 1));
}

}  // namespace fkpath::testing

#endif  // FKPATH_KALMAN_ORACLE_HPP
