#pragma once

#include <Eigen/Core>
#include <cstddef>

namespace polishsense {

struct SvrParams {
  double c = 1.0;
  double epsilon = 0.1;
  /// Stop when primal - dual < gap_tolerance * (1 + |primal|).
  double gap_tolerance = 1e-6;
  std::size_t max_iterations = 500;
};

/// Linear epsilon-insensitive support vector regression, f(x) = w.x + b.
struct SvrModel {
  Eigen::VectorXd w;
  double b = 0.0;
  /// beta_i = alpha_i - alpha_i^*, so w = sum_i beta_i x_i.
  Eigen::VectorXd dual_coef;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  std::size_t iterations = 0;

  double predict(const Eigen::VectorXd& x) const { return w.dot(x) + b; }
  double duality_gap() const { return primal_objective - dual_objective; }
};

/// 0.5 |w|^2 + C sum_i max(0, |y_i - w.x_i - b| - epsilon)
double svr_primal_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w, double b, double c, double epsilon);

/// Offset minimizing the primal for a fixed w: the midpoint of the interval
/// of minimizers of sum_i max(0, |r_i - b| - epsilon), r = y - X w.
double svr_optimal_offset(const Eigen::VectorXd& residual, double epsilon);

/// Solves the dual with a primal-dual interior-point method and stops once the
/// duality gap test passes. Throws Error with the final gap if max_iterations
/// is exhausted.
SvrModel fit_svr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SvrParams& params);

}  // namespace polishsense
