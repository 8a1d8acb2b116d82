#pragma once

#include <Eigen/Dense>

#include "dgsqp/core/game.hpp"

// Central finite differences over plain double game evaluations.  These are
// the independent oracles the derivative code is validated against; nothing
// here touches the dual-number machinery.
namespace dgsqp::fd {

inline Eigen::VectorXd cost_gradient(const DynamicGame& g, int agent, const Eigen::VectorXd& u,
                                     double h = 1e-5) {
  Eigen::VectorXd grad(u.size());
  Eigen::VectorXd p = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    p[i] = u[i] + h;
    const double fp = g.eval_cost(agent, p);
    p[i] = u[i] - h;
    const double fm = g.eval_cost(agent, p);
    p[i] = u[i];
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

inline Eigen::MatrixXd constraint_jacobian(const DynamicGame& g, const Eigen::VectorXd& u,
                                           double h = 1e-5) {
  Eigen::MatrixXd J(g.dims().num_constraints, u.size());
  Eigen::VectorXd p = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    p[i] = u[i] + h;
    const Eigen::VectorXd cp = g.eval_constraints(p);
    p[i] = u[i] - h;
    const Eigen::VectorXd cm = g.eval_constraints(p);
    p[i] = u[i];
    J.col(i) = (cp - cm) / (2.0 * h);
  }
  return J;
}

// Four-point stencil for the Hessian of L^i(u) = J^i(u) + lambda' C(u).
inline Eigen::MatrixXd lagrangian_hessian(const DynamicGame& g, int agent,
                                          const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                                          double h = 1e-5) {
  auto lag = [&](const Eigen::VectorXd& p) {
    double v = g.eval_cost(agent, p);
    if (lambda.size() > 0) v += lambda.dot(g.eval_constraints(p));
    return v;
  };
  const int n = static_cast<int>(u.size());
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd p = u;
  for (int r = 0; r < n; ++r) {
    for (int c = r; c < n; ++c) {
      p[r] += h;
      p[c] += h;
      const double fpp = lag(p);
      p[c] -= 2.0 * h;
      const double fpm = lag(p);
      p[r] -= 2.0 * h;
      const double fmm = lag(p);
      p[c] += 2.0 * h;
      const double fmp = lag(p);
      p[r] = u[r];
      p[c] = u[c];
      H(r, c) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      H(c, r) = H(r, c);
    }
  }
  return H;
}

}  // namespace dgsqp::fd
