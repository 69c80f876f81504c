#include "polishsense/linear.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>

#include "polishsense/error.hpp"

namespace polishsense {

namespace {

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1 || x.cols() < 1) throw ConfigError("design matrix must be at least 1x1");
  if (x.rows() != y.size()) throw ConfigError("design matrix and target lengths differ");
  if (!x.allFinite() || !y.allFinite()) throw ConfigError("inputs must be finite");
}

struct Centred {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::RowVectorXd x_mean;
  double y_mean;
};

Centred centre(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Centred c;
  c.x_mean = x.colwise().mean();
  c.y_mean = y.mean();
  c.x = x.rowwise() - c.x_mean;
  c.y = y.array() - c.y_mean;
  return c;
}

LinearModel finish(const Centred& c, Eigen::VectorXd coef) {
  LinearModel m;
  m.intercept = c.y_mean - c.x_mean.dot(coef);
  m.coef = std::move(coef);
  return m;
}

Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  return cod.solve(b);
}

}  // namespace

LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_inputs(x, y);
  // Centring profiles out the intercept, so the minimum-norm rule applies to
  // the slopes only.
  const Centred c = centre(x, y);
  return finish(c, min_norm_solve(c.x, c.y));
}

LinearModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  check_inputs(x, y);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("ridge lambda must be >= 0");
  const Centred c = centre(x, y);
  if (lambda == 0.0) return finish(c, min_norm_solve(c.x, c.y));
  Eigen::MatrixXd gram = c.x.transpose() * c.x;
  gram.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error("ridge normal equations are not positive definite");
  }
  Eigen::VectorXd coef = llt.solve(c.x.transpose() * c.y);
  return finish(c, std::move(coef));
}

}  // namespace polishsense
