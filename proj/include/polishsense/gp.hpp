#pragma once

#include <Eigen/Core>

namespace polishsense {

struct GpParams {
  double length_scale = 1.0;
  /// Added to the Gram diagonal for numerical stability only.
  double jitter = 1e-10;
};

/// k(a, b) = exp(-|a - b|^2 / (2 l^2))
double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double length_scale);

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& x, double length_scale);

/// Zero-mean Gaussian-process posterior mean with an RBF kernel.
struct GpModel {
  GpParams params;
  Eigen::MatrixXd train_x;
  /// (K + jitter I)^-1 y
  Eigen::VectorXd weights;

  double predict(const Eigen::VectorXd& x) const;
};

/// Throws Error when the jittered Gram matrix fails to factor; a larger
/// jitter usually fixes that.
GpModel fit_gp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpParams& params);

}  // namespace polishsense
