#include "polishsense/gbr.hpp"

#include <algorithm>

#include "polishsense/error.hpp"

namespace polishsense {

double GbrModel::predict(const Eigen::VectorXd& x, std::size_t stage_count) const {
  double f = initial;
  const std::size_t m = std::min(stage_count, stages.size());
  for (std::size_t s = 0; s < m; ++s) f += learning_rate * stages[s].predict(x);
  return f;
}

Eigen::VectorXd GbrModel::raw_importance(std::size_t feature_count) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(feature_count));
  for (const auto& t : stages) acc += t.raw_importance();
  return acc;
}

GbrModel fit_gbr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbrParams& params) {
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    throw ConfigError("learning_rate must lie in (0, 1]");
  }
  if (x.rows() < 1 || x.rows() != y.size()) throw ConfigError("gbr inputs are empty or mismatched");
  GbrModel m;
  m.learning_rate = params.learning_rate;
  m.initial = y.mean();
  Eigen::VectorXd current = Eigen::VectorXd::Constant(y.size(), m.initial);
  m.stages.reserve(params.stages);
  for (std::size_t s = 0; s < params.stages; ++s) {
    const Eigen::VectorXd residual = y - current;
    RegressionTree tree = fit_tree(x, residual, params.base_tree);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      current(i) += params.learning_rate * tree.predict(x.row(i).transpose());
    }
    m.stages.push_back(std::move(tree));
  }
  return m;
}

}  // namespace polishsense
