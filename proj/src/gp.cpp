#include "polishsense/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "polishsense/error.hpp"

namespace polishsense {

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double length_scale) {
  return std::exp(-(a - b).squaredNorm() / (2.0 * length_scale * length_scale));
}

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& x, double length_scale) {
  const auto n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = rbf_kernel(x.row(i).transpose(), x.row(j).transpose(), length_scale);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double GpModel::predict(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
    sum += rbf_kernel(train_x.row(i).transpose(), x, params.length_scale) * weights(i);
  }
  return sum;
}

GpModel fit_gp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpParams& params) {
  if (!(params.length_scale > 0.0)) throw ConfigError("gp length_scale must be > 0");
  if (!(params.jitter > 0.0)) throw ConfigError("gp jitter must be > 0");
  if (x.rows() < 1 || x.rows() != y.size()) throw ConfigError("gp inputs are empty or mismatched");
  Eigen::MatrixXd k = rbf_gram(x, params.length_scale);
  k.diagonal().array() += params.jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw Error("gp Gram matrix is not positive definite; increase jitter");
  }
  GpModel m;
  m.params = params;
  m.train_x = x;
  m.weights = llt.solve(y);
  return m;
}

}  // namespace polishsense
