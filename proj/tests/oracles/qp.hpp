#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

namespace oracle {

// min 0.5 v'Hv + f'v  s.t.  Av <= c, by a plain primal-dual interior-point
// method on the slack form. Dense and slow; meant for a handful of variables.
inline Eigen::VectorXd solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& f,
                                const Eigen::MatrixXd& a, const Eigen::VectorXd& c) {
  const Eigen::Index nv = h.rows(), nc = a.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd s = Eigen::VectorXd::Ones(nc);
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(nc);
  for (int it = 0; it < 300; ++it) {
    const Eigen::VectorXd rd = h * v + f + a.transpose() * lam;
    const Eigen::VectorXd rp = a * v + s - c;
    const double mu = s.dot(lam) / static_cast<double>(nc);
    if (mu < 1e-14 && rd.lpNorm<Eigen::Infinity>() < 1e-11 && rp.lpNorm<Eigen::Infinity>() < 1e-11) {
      return v;
    }
    const Eigen::VectorXd rc = Eigen::VectorXd::Constant(nc, 0.1 * mu) - s.cwiseProduct(lam);
    const Eigen::VectorXd d = lam.cwiseQuotient(s);
    const Eigen::MatrixXd m = h + a.transpose() * d.asDiagonal() * a;
    const Eigen::VectorXd rhs = -rd - a.transpose() * (rc + lam.cwiseProduct(rp)).cwiseQuotient(s);
    const Eigen::VectorXd dv = m.fullPivLu().solve(rhs);
    const Eigen::VectorXd ds = -rp - a * dv;
    const Eigen::VectorXd dl = (rc - lam.cwiseProduct(ds)).cwiseQuotient(s);
    double t = 1.0;
    for (Eigen::Index i = 0; i < nc; ++i) {
      if (ds(i) < 0) t = std::min(t, -0.99 * s(i) / ds(i));
      if (dl(i) < 0) t = std::min(t, -0.99 * lam(i) / dl(i));
    }
    v += t * dv;
    s += t * ds;
    lam += t * dl;
  }
  throw std::runtime_error("qp oracle did not converge");
}

// Primal epsilon-SVR objective optimum over (w, b, xi, xi*).
inline double svr_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double cost,
                            double eps) {
  const Eigen::Index n = x.rows(), p = x.cols();
  const Eigen::Index nv = p + 1 + 2 * n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nv, nv);
  h.topLeftCorner(p, p).setIdentity();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nv);
  f.tail(2 * n).setConstant(cost);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4 * n, nv);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(4 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // y - wx - b <= eps + xi
    a.row(i).head(p) = -x.row(i);
    a(i, p) = -1.0;
    a(i, p + 1 + i) = -1.0;
    c(i) = eps - y(i);
    // wx + b - y <= eps + xi*
    a.row(n + i).head(p) = x.row(i);
    a(n + i, p) = 1.0;
    a(n + i, p + 1 + n + i) = -1.0;
    c(n + i) = eps + y(i);
    a(2 * n + i, p + 1 + i) = -1.0;
    a(3 * n + i, p + 1 + n + i) = -1.0;
  }
  const Eigen::VectorXd v = solve_qp(h, f, a, c);
  return 0.5 * v.head(p).squaredNorm() + cost * v.tail(2 * n).sum();
}

}  // namespace oracle
