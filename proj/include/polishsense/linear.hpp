#pragma once

#include <Eigen/Core>

namespace polishsense {

/// y = intercept + coef . x
struct LinearModel {
  Eigen::VectorXd coef;
  double intercept = 0.0;

  double predict(const Eigen::VectorXd& x) const { return intercept + coef.dot(x); }
};

/// Ordinary least squares with an unpenalized intercept. Rank-deficient
/// systems (including p + 1 > n) return the minimum-norm coefficient vector.
LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Ridge regression on centred data; the intercept is not penalized.
/// lambda = 0 reduces to the minimum-norm least-squares solution.
LinearModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

}  // namespace polishsense
