#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dgsqp/core/game.hpp"
#include "dgsqp/qp/psd.hpp"
#include "dgsqp/qp/qp.hpp"
#include "dgsqp/solver/config.hpp"
#include "dgsqp/solver/trace.hpp"

namespace dgsqp::solver {

enum class SolveStatus { Converged, MaxIterations, LineSearchFailure, QpFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::LineSearchFailure: return "line_search_failure";
    case SolveStatus::QpFailure: return "qp_failure";
  }
  return "unknown";
}

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIterations;
  Eigen::VectorXd u;
  Eigen::VectorXd lambda;
  int iterations = 0;
  double stat_res = std::numeric_limits<double>::infinity();
  double feas_res = std::numeric_limits<double>::infinity();
  double comp_res = std::numeric_limits<double>::infinity();
  double final_merit = std::numeric_limits<double>::infinity();
  double final_mu = 0.0;
  double final_eps = 0.0;
  double wall_time_s = 0.0;
  std::vector<IterationRecord> trace;
};

// Multiplier warm start: least squares on the stacked stationarity condition,
// lambda_0 = max(0, -(G G')^{-1} G h), with a minimum norm fallback when
// G G' is singular.
inline Eigen::VectorXd init_duals_least_squares(const Eigen::MatrixXd& G,
                                                const Eigen::VectorXd& h) {
  if (G.rows() == 0) return Eigen::VectorXd(0);
  Eigen::MatrixXd GGt = G * G.transpose();
  Eigen::VectorXd rhs = -(G * h);
  return GGt.completeOrthogonalDecomposition().solve(rhs);
}

inline Eigen::VectorXd init_duals(const Eigen::MatrixXd& G, const Eigen::VectorXd& h) {
  return init_duals_least_squares(G, h).cwiseMax(0.0);
}

// Eq. 8/10 data: regularized projected Hessian plus the stacked first order
// blocks the QP consumes.
struct Subproblem {
  Eigen::MatrixXd B;
  Eigen::VectorXd h;
  Eigen::MatrixXd G;
  Eigen::VectorXd C;
};

inline Subproblem build_subproblem(const DerivativeBundle& bundle, double eps) {
  Subproblem sp;
  Eigen::MatrixXd sym =
      0.5 * (bundle.lagrangian_hessian + bundle.lagrangian_hessian.transpose());
  sp.B = qp::project_psd(sym);
  sp.B.diagonal().array() += eps;
  sp.h = bundle.own_gradient;
  sp.G = bundle.constraint_jacobian;
  sp.C = bundle.constraints;
  return sp;
}

// Merit function (Eq. 13): phi = 0.5 ||grad_L||^2 + mu ||C - s||_1.
inline double merit(const Eigen::VectorXd& grad_L, const Eigen::VectorXd& C,
                    const Eigen::VectorXd& s, double mu) {
  return 0.5 * grad_L.squaredNorm() + mu * (C - s).lpNorm<1>();
}

// Directional derivative of the merit function along the SQP step (Eq. 15).
inline double directional_derivative(const Eigen::VectorXd& grad_L, const Eigen::MatrixXd& L,
                                     const Eigen::MatrixXd& G, const Eigen::VectorXd& p_u,
                                     const Eigen::VectorXd& p_lambda, double mu,
                                     const Eigen::VectorXd& C, const Eigen::VectorXd& s) {
  double g = grad_L.dot(L * p_u + G.transpose() * p_lambda);
  return g - mu * (C - s).lpNorm<1>();
}

// Penalty update (Eq. 16) with monotone memory inside one solve; exactly
// feasible iterates reset the penalty to zero.
inline double update_mu(double mu_prev, double grad_gamma_dot_p, double viol_l1, double rho,
                        double mu_min, double feas_tol = 1e-10) {
  if (viol_l1 <= feas_tol) return 0.0;
  return std::max({mu_prev, mu_min, grad_gamma_dot_p / ((1.0 - rho) * viol_l1)});
}

inline bool check_convergence(double stat, double feas, double comp, const SolverConfig& cfg) {
  return stat <= cfg.conv_tol_stat && feas <= cfg.conv_tol_feas && comp <= cfg.conv_tol_comp;
}

namespace detail {

inline bool finite(const FirstOrderEval& fo) {
  return fo.costs.allFinite() && fo.constraints.allFinite() &&
         fo.constraint_jacobian.allFinite() && fo.cost_gradients.allFinite() &&
         fo.own_gradient.allFinite();
}

struct TrialPoint {
  bool valid = false;
  double alpha = 0.0;
  Eigen::VectorXd u, lambda, s_stepped;
  FirstOrderEval fo;
  Eigen::VectorXd grad_L;
  double gamma = 0.0;
  double merit = std::numeric_limits<double>::infinity();
};

struct Checkpoint {
  Eigen::VectorXd u, lambda, s, p_u, p_lambda, p_s;
  double phi = 0.0, dir = 0.0, mu = 0.0;
};

}  // namespace detail

// DG-SQP iteration (Algorithm 1): SQP steps from the player QPs assembled in
// build_subproblem, globalized by a watchdog line search on the stationarity
// plus infeasibility merit function.
class DgSqpSolver {
 public:
  DgSqpSolver(const DynamicGame& game, SolverConfig cfg) : game_(game), cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  SolveResult solve(const Eigen::VectorXd& u0,
                    const std::function<void(const IterationRecord&)>& observer = {}) const {
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res;
    try {
      res = run(u0, observer);
    } catch (const ModelError&) {
      res.status = SolveStatus::QpFailure;
      res.u = u0;
      res.lambda = Eigen::VectorXd::Zero(game_.dims().num_constraints);
    }
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

 private:
  detail::TrialPoint eval_point(const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                                const Eigen::VectorXd& s_stepped, double mu, double alpha) const {
    detail::TrialPoint t;
    t.alpha = alpha;
    t.u = u;
    t.lambda = lambda;
    t.s_stepped = s_stepped;
    try {
      t.fo = game_.eval_first_order(u);
    } catch (const ModelError&) {
      return t;
    }
    if (!detail::finite(t.fo)) return t;
    t.grad_L = t.fo.own_gradient + t.fo.constraint_jacobian.transpose() * lambda;
    t.gamma = cfg_.merit_variant == MeritVariant::Lagrangian ? 0.5 * t.grad_L.squaredNorm()
                                                             : t.fo.costs.sum();
    t.merit = t.gamma + mu * (t.fo.constraints - s_stepped).lpNorm<1>();
    t.valid = true;
    return t;
  }

  detail::TrialPoint eval_trial(const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                                const Eigen::VectorXd& s, const Eigen::VectorXd& p_u,
                                const Eigen::VectorXd& p_lambda, const Eigen::VectorXd& p_s,
                                double mu, double alpha) const {
    return eval_point(u + alpha * p_u, (lambda + alpha * p_lambda).cwiseMax(0.0), s + alpha * p_s,
                      mu, alpha);
  }

  // Backtracking Armijo search on Eq. 18.  Returns an invalid point when the
  // trial budget is exhausted.
  detail::TrialPoint backtrack(const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                               const Eigen::VectorXd& s, const Eigen::VectorXd& p_u,
                               const Eigen::VectorXd& p_lambda, const Eigen::VectorXd& p_s,
                               double phi, double dir, double mu) const {
    double alpha = 1.0;
    for (int t = 0; t < cfg_.max_trials; ++t, alpha *= cfg_.backtrack) {
      detail::TrialPoint trial = eval_trial(u, lambda, s, p_u, p_lambda, p_s, mu, alpha);
      if (trial.valid && trial.merit <= phi + cfg_.zeta * alpha * dir) return trial;
    }
    return {};
  }

  SolveResult run(const Eigen::VectorXd& u0,
                  const std::function<void(const IterationRecord&)>& observer) const {
    const GameDimensions& dims = game_.dims();
    SolveResult res;
    res.u = u0;
    res.lambda = Eigen::VectorXd::Zero(dims.num_constraints);

    detail::TrialPoint cur =
        eval_point(u0, res.lambda, Eigen::VectorXd::Zero(dims.num_constraints), 0.0, 0.0);
    if (!cur.valid) {
      res.status = SolveStatus::QpFailure;
      return res;
    }
    // Multiplier warm start redefines the current gamma and gradient.
    res.lambda = init_duals(cur.fo.constraint_jacobian, cur.fo.own_gradient);
    cur = eval_point(u0, res.lambda, Eigen::VectorXd::Zero(dims.num_constraints), 0.0, 0.0);
    if (!cur.valid) {
      res.status = SolveStatus::QpFailure;
      return res;
    }

    double eps = cfg_.eps0;
    double mu = 0.0;
    int d_count = 0;
    bool cp_candidate = true;
    std::optional<detail::Checkpoint> cp;

    auto emit = [&](IterationRecord r) {
      if (observer) observer(r);
      res.trace.push_back(std::move(r));
    };
    auto final_row = [&](int iter, double phi, double stat, double feas, double comp) {
      IterationRecord r;
      r.iter = iter;
      r.merit = phi;
      r.stat_res = stat;
      r.feas_res = feas;
      r.comp_res = comp;
      r.alpha = 0.0;
      r.eps = eps;
      r.step_kind = "final";
      r.mu = mu;
      emit(std::move(r));
    };

    for (int q = 0; q <= cfg_.max_iter; ++q) {
      const Eigen::VectorXd& C = cur.fo.constraints;
      const double stat = cur.grad_L.lpNorm<Eigen::Infinity>();
      const double feas = C.size() > 0 ? C.cwiseMax(0.0).lpNorm<Eigen::Infinity>() : 0.0;
      const double comp = C.size() > 0 ? std::abs(res.lambda.dot(C)) : 0.0;
      res.stat_res = stat;
      res.feas_res = feas;
      res.comp_res = comp;
      res.iterations = q;
      res.final_eps = eps;
      res.final_mu = mu;

      Eigen::VectorXd s = C.cwiseMin(0.0);
      const double viol = C.size() > 0 ? (C - s).lpNorm<1>() : 0.0;
      res.final_merit = cur.gamma + mu * viol;

      if (check_convergence(stat, feas, comp, cfg_)) {
        res.status = SolveStatus::Converged;
        final_row(q, res.final_merit, stat, feas, comp);
        return res;
      }
      if (q == cfg_.max_iter) {
        res.status = SolveStatus::MaxIterations;
        final_row(q, res.final_merit, stat, feas, comp);
        return res;
      }

      // Subproblem assembly (Eq. 8) and QP solve (Eq. 10).
      Eigen::MatrixXd L;
      try {
        L = game_.eval_lagrangian_hessian(cur.u, res.lambda, cfg_.hessian_mode);
      } catch (const ModelError&) {
        res.status = SolveStatus::QpFailure;
        final_row(q, res.final_merit, stat, feas, comp);
        return res;
      }
      if (!L.allFinite()) {
        res.status = SolveStatus::QpFailure;
        final_row(q, res.final_merit, stat, feas, comp);
        return res;
      }
      DerivativeBundle bundle;
      bundle.lagrangian_hessian = std::move(L);
      bundle.own_gradient = cur.fo.own_gradient;
      bundle.constraint_jacobian = cur.fo.constraint_jacobian;
      bundle.constraints = C;
      Subproblem sp = build_subproblem(bundle, eps);

      qp::QpSolution qps = qp::solve_qp(sp.B, sp.h, sp.G, sp.C);
      bool relaxed = false;
      if (qps.status != qp::QpStatus::Solved) {
        qps = qp::solve_qp_elastic(sp.B, sp.h, sp.G, sp.C);
        if (qps.status != qp::QpStatus::Solved || !qps.p.allFinite()) {
          res.status = SolveStatus::QpFailure;
          final_row(q, res.final_merit, stat, feas, comp);
          return res;
        }
        relaxed = true;
      }

      const Eigen::VectorXd p_u = qps.p;
      const Eigen::VectorXd d = qps.d.cwiseMax(0.0);
      const Eigen::VectorXd p_lambda = d - res.lambda;
      const Eigen::VectorXd p_s = C + sp.G * p_u - s;

      double grad_gamma_dot_p;
      if (cfg_.merit_variant == MeritVariant::Lagrangian) {
        grad_gamma_dot_p = cur.grad_L.dot(bundle.lagrangian_hessian * p_u +
                                          sp.G.transpose() * p_lambda);
      } else {
        grad_gamma_dot_p = cur.fo.cost_gradients.colwise().sum().dot(p_u);
      }
      mu = update_mu(mu, grad_gamma_dot_p, viol, cfg_.rho, cfg_.mu_min);
      const double phi = cur.gamma + mu * viol;
      const double dir = grad_gamma_dot_p - mu * viol;
      res.final_merit = phi;
      res.final_mu = mu;

      if (cp_candidate) {
        cp = detail::Checkpoint{cur.u, res.lambda, s, p_u, p_lambda, p_s, phi, dir, mu};
        cp_candidate = false;
      }

      IterationRecord row;
      row.iter = q;
      row.merit = phi;
      row.stat_res = stat;
      row.feas_res = feas;
      row.comp_res = comp;
      row.eps = eps;
      row.mu = mu;
      row.viol_l1 = viol;
      row.dir_deriv = dir;

      detail::TrialPoint next;
      const bool must_m =
          cfg_.monotone || (!relaxed && cfg_.max_d_steps >= 0 && d_count >= cfg_.max_d_steps);
      if (!must_m) {
        next = eval_trial(cur.u, res.lambda, s, p_u, p_lambda, p_s, mu, 1.0);
        if (next.valid) {
          row.alpha = 1.0;
          // A full step that already meets Eq. 18 is an m-step outright: the
          // decrease condition held at the largest alpha, so the
          // regularization decays and the watchdog window restarts.  Only
          // steps taken on credit (merit test failed or skipped) are d-steps.
          if (!relaxed && next.merit <= phi + cfg_.zeta * dir) {
            row.step_kind = "m";
            eps *= cfg_.eta;
            d_count = 0;
            cp_candidate = true;
          } else {
            row.step_kind = "d";
            ++d_count;
            cp_candidate = false;
          }
        } else {
          next = detail::TrialPoint{};
        }
      }
      if (!next.valid) {
        next = backtrack(cur.u, res.lambda, s, p_u, p_lambda, p_s, phi, dir, mu);
        if (next.valid) {
          row.alpha = next.alpha;
          row.step_kind = "m";
          eps *= cfg_.eta;
          d_count = 0;
          cp_candidate = true;
        }
      }
      if (!next.valid && !cfg_.monotone && cp &&
          (cp->u - cur.u).lpNorm<Eigen::Infinity>() > 0.0) {
        // Watchdog reset: rewind to the last checkpoint (penalty included)
        // and backtrack along its stored step.
        mu = cp->mu;
        next = backtrack(cp->u, cp->lambda, cp->s, cp->p_u, cp->p_lambda, cp->p_s, cp->phi,
                         cp->dir, cp->mu);
        if (next.valid) {
          row.alpha = next.alpha;
          row.step_kind = "watchdog_reset";
          row.mu = mu;
          eps *= cfg_.eta;
          d_count = 0;
          cp_candidate = true;
        }
      }
      if (!next.valid) {
        res.status = SolveStatus::LineSearchFailure;
        final_row(q, phi, stat, feas, comp);
        return res;
      }

      emit(std::move(row));
      cur = std::move(next);
      res.u = cur.u;
      res.lambda = cur.lambda;
    }
    return res;  // unreachable; loop exits through the q == max_iter branch
  }

  const DynamicGame& game_;
  SolverConfig cfg_;
};

inline SolveResult solve(const DynamicGame& game, const Eigen::VectorXd& u0,
                         const SolverConfig& cfg = {},
                         const std::function<void(const IterationRecord&)>& observer = {}) {
  return DgSqpSolver(game, cfg).solve(u0, observer);
}

}  // namespace dgsqp::solver
