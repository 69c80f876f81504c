#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "polishsense/tree.hpp"

namespace polishsense {

struct GbrParams {
  std::size_t stages = 100;
  double learning_rate = 0.1;
  TreeParams base_tree{1, 3};
};

/// Squared-loss gradient boosting: F(x) = F0 + lr * sum_m f_m(x).
struct GbrModel {
  double initial = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> stages;

  double predict(const Eigen::VectorXd& x) const { return predict(x, stages.size()); }
  /// Prediction using only the first `stage_count` learners.
  double predict(const Eigen::VectorXd& x, std::size_t stage_count) const;
  Eigen::VectorXd raw_importance(std::size_t feature_count) const;
};

/// F0 = mean(y); each stage fits a tree to the current residuals (the
/// negative gradient of the squared loss) and adds it scaled by the
/// learning rate. The regularizer is expressed through base_tree limits.
GbrModel fit_gbr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbrParams& params);

}  // namespace polishsense
