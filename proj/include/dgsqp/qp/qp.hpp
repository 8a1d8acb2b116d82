#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>

#include "dgsqp/core/errors.hpp"

namespace dgsqp::qp {

enum class QpStatus { Solved, Infeasible, MaxIterations };

struct QpSolution {
  Eigen::VectorXd p;  // primal step
  Eigen::VectorXd d;  // inequality multipliers, nonnegative when solved
  QpStatus status = QpStatus::MaxIterations;
  int iterations = 0;
  // Elastic bound violation; only meaningful for solve_qp_elastic.
  double sigma = 0.0;
};

struct IpmOptions {
  int max_iterations = 100;
  double tol = 1e-10;        // scaled residual target
  double boundary = 0.9995;  // fraction-to-boundary factor
};

namespace detail {

inline double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx, double boundary) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx[i] < 0.0) a = std::min(a, -boundary * x[i] / dx[i]);
  return a;
}

inline bool factorize(Eigen::LDLT<Eigen::MatrixXd>& ldlt, const Eigen::MatrixXd& M) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  for (double reg = 0.0; reg <= 1e-6 * scale; reg = (reg == 0.0 ? 1e-12 * scale : reg * 100.0)) {
    Eigen::MatrixXd Mr = M;
    if (reg > 0.0) Mr.diagonal().array() += reg;
    ldlt.compute(Mr);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) return true;
  }
  return false;
}

}  // namespace detail

// Inequality constrained convex QP
//   min 0.5 p'Bp + h'p  s.t.  Gp + c <= 0
// solved with a dense Mehrotra predictor-corrector interior point method.
// B must be positive semidefinite.  On Solved the KKT residuals satisfy
// stationarity/feasibility <= 1e-7 and complementarity <= 1e-6.
inline QpSolution solve_qp_ipm(const Eigen::MatrixXd& B, const Eigen::VectorXd& h,
                               const Eigen::MatrixXd& G, const Eigen::VectorXd& c,
                               const IpmOptions& opts = {}) {
  const int n = static_cast<int>(B.rows());
  const int m = static_cast<int>(G.rows());
  if (B.cols() != n || h.size() != n || (m > 0 && G.cols() != n) || c.size() != m)
    throw ContractViolation("solve_qp: dimension mismatch");

  QpSolution sol;
  sol.d.setZero(m);

  if (m == 0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(B);
    Eigen::VectorXd p;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive())
      p = ldlt.solve(-h);
    else
      p = B.completeOrthogonalDecomposition().solve(-h);
    const double res = (B * p + h).cwiseAbs().maxCoeff();
    sol.p = p;
    sol.status = res <= 1e-7 * std::max(1.0, h.cwiseAbs().maxCoeff()) ? QpStatus::Solved
                                                                      : QpStatus::MaxIterations;
    return sol;
  }

  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = c.cwiseAbs().cwiseMax(1.0);
  Eigen::VectorXd d = Eigen::VectorXd::Ones(m);

  const double s_d = std::max({1.0, h.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff()});
  const double s_p = std::max({1.0, c.cwiseAbs().maxCoeff(), G.cwiseAbs().maxCoeff()});

  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::VectorXd r_d = B * p + h + G.transpose() * d;
    Eigen::VectorXd r_p = G * p + c + z;
    double mu = z.dot(d) / m;
    sol.iterations = it;

    if (r_d.cwiseAbs().maxCoeff() <= opts.tol * s_d && r_p.cwiseAbs().maxCoeff() <= opts.tol * s_p &&
        mu <= opts.tol) {
      sol.p = p;
      sol.d = d;
      sol.status = QpStatus::Solved;
      return sol;
    }

    Eigen::VectorXd w = d.cwiseQuotient(z);
    Eigen::MatrixXd M = B + G.transpose() * w.asDiagonal() * G;
    if (!detail::factorize(ldlt, M)) break;

    // Affine predictor.
    Eigen::VectorXd v = w.cwiseProduct(r_p) - d;
    Eigen::VectorXd dp_aff = ldlt.solve(-r_d - G.transpose() * v);
    Eigen::VectorXd dz_aff = -r_p - G * dp_aff;
    Eigen::VectorXd dd_aff = v + w.cwiseProduct(G * dp_aff);

    double a_aff = std::min(detail::max_step(z, dz_aff, 1.0), detail::max_step(d, dd_aff, 1.0));
    double mu_aff = (z + a_aff * dz_aff).dot(d + a_aff * dd_aff) / m;
    double sigma = std::pow(mu_aff / mu, 3);

    // Corrector with centering.
    Eigen::VectorXd r_c = dz_aff.cwiseProduct(dd_aff);
    r_c.array() -= sigma * mu;
    Eigen::VectorXd v2 = v - z.cwiseInverse().cwiseProduct(r_c);
    Eigen::VectorXd dp = ldlt.solve(-r_d - G.transpose() * v2);
    Eigen::VectorXd dz = -r_p - G * dp;
    Eigen::VectorXd dd = v2 + w.cwiseProduct(G * dp);

    double alpha = std::min(detail::max_step(z, dz, opts.boundary),
                            detail::max_step(d, dd, opts.boundary));
    p += alpha * dp;
    z += alpha * dz;
    d += alpha * dd;
  }

  sol.p = p;
  sol.d = d;
  sol.status = QpStatus::MaxIterations;
  return sol;
}

// Elastic relaxation: min 0.5 p'Bp + h'p + w*sigma subject to
// Gp + c <= sigma, sigma >= 0.  Always feasible; sigma measures the
// violation of the original constraints.
inline QpSolution solve_qp_elastic(const Eigen::MatrixXd& B, const Eigen::VectorXd& h,
                                   const Eigen::MatrixXd& G, const Eigen::VectorXd& c,
                                   double penalty = 0.0, const IpmOptions& opts = {}) {
  const int n = static_cast<int>(B.rows());
  const int m = static_cast<int>(G.rows());
  if (penalty <= 0.0) penalty = 1e6 * std::max(1.0, h.cwiseAbs().maxCoeff());
  Eigen::MatrixXd Be = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Be.topLeftCorner(n, n) = B;
  Be(n, n) = 1e-8 * penalty;
  Eigen::VectorXd he(n + 1);
  he << h, penalty;
  Eigen::MatrixXd Ge = Eigen::MatrixXd::Zero(m + 1, n + 1);
  Ge.topLeftCorner(m, n) = G;
  Ge.col(n).head(m).setConstant(-1.0);
  Ge(m, n) = -1.0;
  Eigen::VectorXd ce(m + 1);
  ce << c, 0.0;
  QpSolution es = solve_qp_ipm(Be, he, Ge, ce, opts);
  QpSolution sol;
  sol.status = es.status;
  sol.iterations = es.iterations;
  if (es.p.size() == n + 1) {
    sol.p = es.p.head(n);
    sol.sigma = es.p[n];
  }
  if (es.d.size() == m + 1) sol.d = es.d.head(m);
  return sol;
}

// Front end used by the SQP loop: runs the interior point method and, when
// it stalls, classifies the subproblem through an elastic probe.
inline QpSolution solve_qp(const Eigen::MatrixXd& B, const Eigen::VectorXd& h,
                           const Eigen::MatrixXd& G, const Eigen::VectorXd& c,
                           const IpmOptions& opts = {}) {
  QpSolution sol = solve_qp_ipm(B, h, G, c, opts);
  if (sol.status != QpStatus::Solved && G.rows() > 0) {
    QpSolution probe = solve_qp_elastic(B, h, G, c, 0.0, opts);
    if (probe.status == QpStatus::Solved && probe.sigma > 1e-6)
      sol.status = QpStatus::Infeasible;
  }
  return sol;
}

// Equality constrained QP through the symmetric saddle system
//   [B Gbar'; Gbar 0] [p; d] = -[h; cbar].
// Errors out when the KKT matrix is singular (rank deficient Gbar or B
// singular on its null space).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_eqp(const Eigen::MatrixXd& B,
                                                             const Eigen::VectorXd& h,
                                                             const Eigen::MatrixXd& Gbar,
                                                             const Eigen::VectorXd& cbar) {
  const int n = static_cast<int>(B.rows());
  const int mb = static_cast<int>(Gbar.rows());
  if (B.cols() != n || h.size() != n || (mb > 0 && Gbar.cols() != n) || cbar.size() != mb)
    throw ContractViolation("solve_eqp: dimension mismatch");
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + mb, n + mb);
  K.topLeftCorner(n, n) = B;
  if (mb > 0) {
    K.topRightCorner(n, mb) = Gbar.transpose();
    K.bottomLeftCorner(mb, n) = Gbar;
  }
  Eigen::VectorXd rhs(n + mb);
  rhs.head(n) = -h;
  rhs.tail(mb) = -cbar;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) throw ContractViolation("solve_eqp: singular KKT system");
  Eigen::VectorXd sol = lu.solve(rhs);
  return {sol.head(n), sol.tail(mb)};
}

// Nonsymmetric Newton system on the stacked KKT conditions (Eq. 14):
//   [L Gbar'; Gbar 0] [p_u; p_lambda] = -[h + Gbar' lambda; cbar].
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> newton_step(const Eigen::MatrixXd& L,
                                                               const Eigen::VectorXd& h,
                                                               const Eigen::MatrixXd& Gbar,
                                                               const Eigen::VectorXd& cbar,
                                                               const Eigen::VectorXd& lambda) {
  const int n = static_cast<int>(L.rows());
  const int mb = static_cast<int>(Gbar.rows());
  if (L.cols() != n || h.size() != n || (mb > 0 && Gbar.cols() != n) || cbar.size() != mb ||
      lambda.size() != mb)
    throw ContractViolation("newton_step: dimension mismatch");
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + mb, n + mb);
  K.topLeftCorner(n, n) = L;
  if (mb > 0) {
    K.topRightCorner(n, mb) = Gbar.transpose();
    K.bottomLeftCorner(mb, n) = Gbar;
  }
  Eigen::VectorXd rhs(n + mb);
  rhs.head(n) = -(h + (mb > 0 ? Eigen::VectorXd(Gbar.transpose() * lambda)
                              : Eigen::VectorXd::Zero(n)));
  rhs.tail(mb) = -cbar;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) throw ContractViolation("newton_step: singular KKT system");
  Eigen::VectorXd sol = lu.solve(rhs);
  return {sol.head(n), sol.tail(mb)};
}

}  // namespace dgsqp::qp
