#include "polishsense/svr.hpp"

#include <fmt/format.h>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "polishsense/error.hpp"

namespace polishsense {

double svr_primal_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w, double b, double c, double epsilon) {
  const Eigen::VectorXd r = y - x * w;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) loss += std::max(0.0, std::abs(r(i) - b) - epsilon);
  return 0.5 * w.squaredNorm() + c * loss;
}

double svr_optimal_offset(const Eigen::VectorXd& residual, double epsilon) {
  // g(b) = sum max(0, b - (r_i + eps)) + max(0, (r_i - eps) - b). Its right
  // derivative at b is #{r_i + eps <= b} - #{r_i - eps > b}.
  const auto n = static_cast<std::size_t>(residual.size());
  std::vector<double> upper(n), lower(n);
  for (std::size_t i = 0; i < n; ++i) {
    upper[i] = residual(static_cast<Eigen::Index>(i)) + epsilon;
    lower[i] = residual(static_cast<Eigen::Index>(i)) - epsilon;
  }
  std::sort(upper.begin(), upper.end());
  std::sort(lower.begin(), lower.end());
  auto right_slope = [&](double b) {
    const auto below = std::upper_bound(upper.begin(), upper.end(), b) - upper.begin();
    const auto above = lower.end() - std::upper_bound(lower.begin(), lower.end(), b);
    return below - above;
  };
  std::vector<double> points(upper);
  points.insert(points.end(), lower.begin(), lower.end());
  std::sort(points.begin(), points.end());
  // First breakpoint where the right slope becomes >= 0 starts the minimizer
  // interval; the first where it becomes > 0 ends it. Slopes are monotone.
  const auto lo = std::partition_point(points.begin(), points.end(),
                                       [&](double b) { return right_slope(b) < 0; });
  const auto hi = std::partition_point(points.begin(), points.end(),
                                       [&](double b) { return right_slope(b) <= 0; });
  const double a = lo == points.end() ? points.back() : *lo;
  const double z = hi == points.end() ? points.back() : *hi;
  return a + (z - a) / 2.0;
}

namespace {

// Dual in libsvm form over a = (alpha, alpha*):
//   min 0.5 a'Qa + p'a  s.t.  z'a = 0, 0 <= a <= C,
// with Q = [K -K; -K K] and K = XX'. Solved by a Mehrotra predictor-corrector
// interior-point method, which is insensitive to feature scaling.
class DualIpm {
 public:
  DualIpm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SvrParams& p)
      : x_(x), y_(y), n_(x.rows()), m_(2 * x.rows()), c_(p.c), eps_(p.epsilon) {
    const Eigen::MatrixXd k = x * x.transpose();
    q_.resize(m_, m_);
    q_ << k, -k, -k, k;
    p_.resize(m_);
    p_ << Eigen::VectorXd::Constant(n_, eps_) - y, Eigen::VectorXd::Constant(n_, eps_) + y;
    z_.resize(m_);
    z_ << Eigen::VectorXd::Ones(n_), -Eigen::VectorXd::Ones(n_);
    // Objective scaling only; the minimizer is unchanged.
    scale_ = std::max({1.0, q_.diagonal().maxCoeff(), p_.cwiseAbs().maxCoeff()});
    q_ /= scale_;
    p_ /= scale_;
    a_ = Eigen::VectorXd::Constant(m_, c_ / 2.0);
    lam_ = Eigen::VectorXd::Ones(m_);
    mu_ = Eigen::VectorXd::Ones(m_);
  }

  Eigen::VectorXd beta() const { return a_.head(n_) - a_.tail(n_); }

  double dual_objective(const Eigen::VectorXd& w) const {
    return -0.5 * w.squaredNorm() - eps_ * a_.sum() + y_.dot(beta());
  }

  void step() {
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(m_, c_) - a_;
    const Eigen::VectorXd rd = q_ * a_ + p_ + nu_ * z_ - lam_ + mu_;
    const double re = z_.dot(a_);
    const double gap_avg = (lam_.dot(a_) + mu_.dot(u)) / static_cast<double>(2 * m_);

    Eigen::MatrixXd h = q_;
    h.diagonal() += lam_.cwiseQuotient(a_) + mu_.cwiseQuotient(u);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    const Eigen::VectorXd hz = ldlt.solve(z_);
    const double zhz = z_.dot(hz);

    struct Dir {
      Eigen::VectorXd da, dl, dm;
      double dnu;
    };
    auto solve = [&](const Eigen::VectorXd& tl, const Eigen::VectorXd& tu) {
      // tl, tu: targets for lam.*a and mu.*u after the step, minus current.
      Dir d;
      const Eigen::VectorXd rhs = -rd + tl.cwiseQuotient(a_) - tu.cwiseQuotient(u);
      const Eigen::VectorXd v = ldlt.solve(rhs);
      d.dnu = (z_.dot(v) + re) / zhz;
      d.da = v - d.dnu * hz;
      d.dl = (tl - lam_.cwiseProduct(d.da)).cwiseQuotient(a_);
      d.dm = (tu + mu_.cwiseProduct(d.da)).cwiseQuotient(u);
      return d;
    };
    auto max_step = [&](const Dir& d) {
      double t = 1.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (d.da(i) < 0.0) t = std::min(t, -a_(i) / d.da(i));
        if (d.da(i) > 0.0) t = std::min(t, u(i) / d.da(i));
        if (d.dl(i) < 0.0) t = std::min(t, -lam_(i) / d.dl(i));
        if (d.dm(i) < 0.0) t = std::min(t, -mu_(i) / d.dm(i));
      }
      return t;
    };

    const Eigen::VectorXd cl = -lam_.cwiseProduct(a_);
    const Eigen::VectorXd cu = -mu_.cwiseProduct(u);
    const Dir aff = solve(cl, cu);
    const double ta = max_step(aff);
    const Eigen::VectorXd a1 = a_ + ta * aff.da;
    const Eigen::VectorXd u1 = Eigen::VectorXd::Constant(m_, c_) - a1;
    const double gap_aff = ((lam_ + ta * aff.dl).dot(a1) + (mu_ + ta * aff.dm).dot(u1)) /
                           static_cast<double>(2 * m_);
    const double sigma = std::pow(gap_aff / gap_avg, 3.0);
    const Eigen::VectorXd target = Eigen::VectorXd::Constant(m_, sigma * gap_avg);
    const Dir d = solve(cl + target - aff.dl.cwiseProduct(aff.da),
                        cu + target + aff.dm.cwiseProduct(aff.da));
    const double t = std::min(1.0, 0.995 * max_step(d));
    a_ += t * d.da;
    lam_ += t * d.dl;
    mu_ += t * d.dm;
    nu_ += t * d.dnu;
  }

 private:
  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  Eigen::Index n_, m_;
  double c_, eps_, scale_ = 1.0;
  Eigen::MatrixXd q_;
  Eigen::VectorXd p_, z_, a_, lam_, mu_;
  double nu_ = 0.0;
};

}  // namespace

SvrModel fit_svr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SvrParams& params) {
  if (!(params.c > 0.0)) throw ConfigError("svr C must be > 0");
  if (!(params.epsilon >= 0.0)) throw ConfigError("svr epsilon must be >= 0");
  if (x.rows() < 1 || x.rows() != y.size()) throw ConfigError("svr inputs are empty or mismatched");
  if (!x.allFinite() || !y.allFinite()) throw ConfigError("svr inputs must be finite");

  DualIpm solver(x, y, params);
  SvrModel m;
  for (std::size_t it = 0;; ++it) {
    m.dual_coef = solver.beta();
    m.w = x.transpose() * m.dual_coef;
    m.b = svr_optimal_offset(y - x * m.w, params.epsilon);
    m.primal_objective = svr_primal_objective(x, y, m.w, m.b, params.c, params.epsilon);
    m.dual_objective = solver.dual_objective(m.w);
    m.iterations = it;
    const double gap = m.duality_gap();
    if (gap < params.gap_tolerance * (1.0 + std::abs(m.primal_objective))) break;
    if (it >= params.max_iterations || !std::isfinite(gap)) {
      throw Error(fmt::format("svr did not converge after {} iterations: duality gap {:.3e} "
                              "(primal {:.6e})",
                              it, gap, m.primal_objective));
    }
    solver.step();
  }
  return m;
}

}  // namespace polishsense
