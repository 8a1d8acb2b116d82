#pragma once

#include <Eigen/Dense>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "dgsqp/core/autodiff.hpp"
#include "dgsqp/core/errors.hpp"

namespace dgsqp {

// Decision vector layout is agent-major: u = (u^1; ...; u^M) with
// u^i = (u^i_0; ...; u^i_{N-1}) stacked by time.
struct GameDimensions {
  int num_agents = 0;
  int horizon = 0;
  int state_dim = 0;
  std::vector<int> input_dims;
  int num_constraints = 0;

  int input_dim(int agent) const { return input_dims[static_cast<std::size_t>(agent)]; }
  int agent_input_total(int agent) const { return horizon * input_dim(agent); }
  int input_offset(int agent) const {
    int off = 0;
    for (int i = 0; i < agent; ++i) off += agent_input_total(i);
    return off;
  }
  int total_input_dim() const { return input_offset(num_agents); }
  int stage_input_dim() const {
    return std::accumulate(input_dims.begin(), input_dims.end(), 0);
  }
  int stage_input_offset(int agent) const {
    return std::accumulate(input_dims.begin(), input_dims.begin() + agent, 0);
  }

  void validate() const {
    if (num_agents < 1) throw ContractViolation("GameDimensions: num_agents < 1");
    if (horizon < 1) throw ContractViolation("GameDimensions: horizon < 1");
    if (state_dim < 1) throw ContractViolation("GameDimensions: state_dim < 1");
    if (static_cast<int>(input_dims.size()) != num_agents)
      throw ContractViolation("GameDimensions: input_dims size != num_agents");
    for (int m : input_dims)
      if (m < 1) throw ContractViolation("GameDimensions: input dim < 1");
    if (num_constraints < 0) throw ContractViolation("GameDimensions: num_constraints < 0");
  }
};

// Read-only view of a rolled-out trajectory plus the decision vector that
// produced it; cost and constraint callbacks are written against this.
template <class S>
struct EvalView {
  const GameDimensions* dims;
  const std::vector<S>* states;  // (N+1) * state_dim
  const std::vector<S>* u;       // total_input_dim

  const S& x(int k, int comp) const {
    return (*states)[static_cast<std::size_t>(k * dims->state_dim + comp)];
  }
  const S& input(int agent, int k, int comp) const {
    return (*u)[static_cast<std::size_t>(dims->input_offset(agent) +
                                         k * dims->input_dim(agent) + comp)];
  }
};

template <class S>
class GameBuilder;

// First and second derivative data of one iterate, Eq. 8 ingredients:
// cost gradients, constraint Jacobian, and the agent-row-blocked Hessian
// whose block row i holds the u^i rows of the Hessian of L^i.
struct DerivativeBundle {
  Eigen::VectorXd costs;             // J^i values, M
  Eigen::VectorXd constraints;       // C(u), n_c
  Eigen::MatrixXd constraint_jacobian;  // G, n_c x n
  Eigen::MatrixXd cost_gradients;    // row i = full gradient of J^i, M x n
  Eigen::VectorXd own_gradient;      // h, stacked per-agent blocks of grad J^i
  Eigen::MatrixXd lagrangian_hessian;   // L, n x n

  Eigen::VectorXd cost_gradient_block(const GameDimensions& d, int agent) const {
    return cost_gradients.row(agent)
        .segment(d.input_offset(agent), d.agent_input_total(agent))
        .transpose();
  }
  Eigen::MatrixXd jacobian_block(const GameDimensions& d, int agent) const {
    return constraint_jacobian.middleCols(d.input_offset(agent), d.agent_input_total(agent));
  }
  Eigen::MatrixXd hessian_block(const GameDimensions& d, int i, int j) const {
    return lagrangian_hessian.block(d.input_offset(i), d.input_offset(j),
                                    d.agent_input_total(i), d.agent_input_total(j));
  }
};

// Values and first derivatives only; the solver evaluates this at line
// search trial points where no Hessian is needed.
struct FirstOrderEval {
  Eigen::VectorXd costs;
  Eigen::VectorXd constraints;
  Eigen::MatrixXd constraint_jacobian;
  Eigen::MatrixXd cost_gradients;
  Eigen::VectorXd own_gradient;
};

enum class HessianMode { Exact, GaussNewton };

namespace detail {

template <class S>
struct GameImpl {
  std::function<void(const std::vector<S>&, const std::vector<S>&, std::vector<S>&)> step;
  std::vector<std::function<S(const EvalView<S>&)>> costs;
  struct Block {
    int rows = 0;
    bool linear = false;
    std::function<void(const EvalView<S>&, S*)> eval;
  };
  std::vector<Block> blocks;
};

inline void truncate_second_order(double&) {}
template <int K>
void truncate_second_order(ad::Dual<double, K>&) {}
template <int K>
void truncate_second_order(ad::Dual<ad::Dual<double, K>, K>& s) {
  for (auto& g : s.d) g.d.fill(0.0);
}

}  // namespace detail

template <class S>
class GameBuilder {
 public:
  explicit GameBuilder(detail::GameImpl<S>& impl) : impl_(impl) {}

  template <class F>
  void set_step(F&& f) {
    impl_.step = std::forward<F>(f);
  }
  template <class F>
  void add_cost(F&& f) {
    impl_.costs.emplace_back(std::forward<F>(f));
  }
  // Blocks declared linear must depend on the decision vector only and
  // affinely; their Jacobian is computed once and cached.
  template <class F>
  void add_constraint_block(int rows, bool linear, F&& f) {
    impl_.blocks.push_back({rows, linear, std::forward<F>(f)});
  }

 private:
  detail::GameImpl<S>& impl_;
};

class DynamicGame {
 public:
  // def must be callable as def(GameBuilder<S>&) for S in
  // {double, ad::D1, ad::D2} and register identical structure for each.
  template <class Def>
  DynamicGame(GameDimensions dims, Eigen::VectorXd x0, Eigen::VectorXd input_lower,
              Eigen::VectorXd input_upper, const Def& def)
      : dims_(std::move(dims)), x0_(std::move(x0)),
        lower_(std::move(input_lower)), upper_(std::move(input_upper)) {
    GameBuilder<double> b0(impl0_);
    def(b0);
    GameBuilder<ad::D1> b1(impl1_);
    def(b1);
    GameBuilder<ad::D2> b2(impl2_);
    def(b2);
    finalize();
  }

  const GameDimensions& dims() const { return dims_; }
  const Eigen::VectorXd& initial_state() const { return x0_; }
  const Eigen::VectorXd& input_lower() const { return lower_; }
  const Eigen::VectorXd& input_upper() const { return upper_; }

  // States under dynamics f from the fixed initial state; row k = x_k.
  Eigen::MatrixXd rollout(const Eigen::VectorXd& u) const {
    check_u(u);
    auto us = ad::lift<double>(u);
    std::vector<double> xs = roll(impl0_, us, false);
    Eigen::MatrixXd out(dims_.horizon + 1, dims_.state_dim);
    for (int k = 0; k <= dims_.horizon; ++k)
      for (int c = 0; c < dims_.state_dim; ++c)
        out(k, c) = xs[static_cast<std::size_t>(k * dims_.state_dim + c)];
    return out;
  }

  double eval_cost(int agent, const Eigen::VectorXd& u) const {
    check_u(u);
    if (agent < 0 || agent >= dims_.num_agents)
      throw ContractViolation("eval_cost: agent index out of range");
    auto us = ad::lift<double>(u);
    std::vector<double> xs = roll(impl0_, us, false);
    EvalView<double> view{&dims_, &xs, &us};
    return impl0_.costs[static_cast<std::size_t>(agent)](view);
  }

  Eigen::VectorXd eval_constraints(const Eigen::VectorXd& u) const {
    check_u(u);
    auto us = ad::lift<double>(u);
    std::vector<double> xs = roll(impl0_, us, false);
    EvalView<double> view{&dims_, &xs, &us};
    Eigen::VectorXd c(dims_.num_constraints);
    std::vector<double> buf;
    int row = 0;
    for (const auto& blk : impl0_.blocks) {
      buf.resize(static_cast<std::size_t>(blk.rows));
      blk.eval(view, buf.data());
      for (int r = 0; r < blk.rows; ++r) c[row + r] = buf[static_cast<std::size_t>(r)];
      row += blk.rows;
    }
    return c;
  }

  FirstOrderEval eval_first_order(const Eigen::VectorXd& u) const {
    check_u(u);
    FirstOrderEval fo;
    const int n = dims_.total_input_dim();
    const int m = dims_.num_agents;
    fo.costs.resize(m);
    fo.constraints.resize(dims_.num_constraints);
    fo.constraint_jacobian.setZero(dims_.num_constraints, n);
    fo.cost_gradients.setZero(m, n);

    auto us = ad::lift<ad::D1>(u);
    std::vector<ad::D1> buf;
    for (int c0 = 0; c0 < n; c0 += ad::kChunk) {
      const int w = std::min(ad::kChunk, n - c0);
      for (int l = 0; l < w; ++l) us[static_cast<std::size_t>(c0 + l)].d[l] = 1.0;
      std::vector<ad::D1> xs = roll(impl1_, us, false);
      EvalView<ad::D1> view{&dims_, &xs, &us};
      for (int i = 0; i < m; ++i) {
        ad::D1 y = impl1_.costs[static_cast<std::size_t>(i)](view);
        if (c0 == 0) fo.costs[i] = y.v;
        for (int l = 0; l < w; ++l) fo.cost_gradients(i, c0 + l) = y.d[l];
      }
      int row = 0;
      for (std::size_t b = 0; b < impl1_.blocks.size(); ++b) {
        const auto& blk = impl1_.blocks[b];
        if (blk.linear) {
          row += blk.rows;
          continue;
        }
        buf.resize(static_cast<std::size_t>(blk.rows));
        blk.eval(view, buf.data());
        for (int r = 0; r < blk.rows; ++r) {
          if (c0 == 0) fo.constraints[row + r] = buf[static_cast<std::size_t>(r)].v;
          for (int l = 0; l < w; ++l)
            fo.constraint_jacobian(row + r, c0 + l) = buf[static_cast<std::size_t>(r)].d[l];
        }
        row += blk.rows;
      }
      for (int l = 0; l < w; ++l) us[static_cast<std::size_t>(c0 + l)].d[l] = 0.0;
    }
    // Cached linear rows: C_lin(u) = G_lin u + c_lin.
    for (std::size_t b = 0; b < linear_rows_.size(); ++b) {
      const auto& lin = linear_rows_[b];
      fo.constraint_jacobian.middleRows(lin.row0, lin.jac.rows()) = lin.jac;
      fo.constraints.segment(lin.row0, lin.jac.rows()) = lin.jac * u + lin.offset;
    }
    fo.own_gradient.resize(n);
    for (int i = 0; i < m; ++i)
      fo.own_gradient.segment(dims_.input_offset(i), dims_.agent_input_total(i)) =
          fo.cost_gradients.row(i)
              .segment(dims_.input_offset(i), dims_.agent_input_total(i))
              .transpose();
    return fo;
  }

  // Full bundle at (u, lambda); lambda weights the constraint rows in each
  // agent's Lagrangian L^i = J^i + lambda' C.
  DerivativeBundle eval_derivatives(const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                                    HessianMode mode = HessianMode::Exact) const {
    FirstOrderEval fo = eval_first_order(u);
    DerivativeBundle bundle;
    bundle.costs = std::move(fo.costs);
    bundle.constraints = std::move(fo.constraints);
    bundle.constraint_jacobian = std::move(fo.constraint_jacobian);
    bundle.cost_gradients = std::move(fo.cost_gradients);
    bundle.own_gradient = std::move(fo.own_gradient);
    bundle.lagrangian_hessian = eval_lagrangian_hessian(u, lambda, mode);
    return bundle;
  }

  // Agent-row-blocked Hessian alone; the first-order part is often already
  // available from a line search evaluation.
  Eigen::MatrixXd eval_lagrangian_hessian(const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                                          HessianMode mode = HessianMode::Exact) const {
    check_u(u);
    if (lambda.size() != dims_.num_constraints)
      throw ContractViolation("eval_derivatives: lambda dimension mismatch");
    if (lambda.size() > 0 && lambda.minCoeff() < -1e-12)
      throw ContractViolation("eval_derivatives: negative multiplier");

    const int n = dims_.total_input_dim();
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
    const bool gn = (mode == HessianMode::GaussNewton);

    auto us = ad::lift<ad::D2>(u);
    std::vector<ad::D2> buf;
    for (int agent = 0; agent < dims_.num_agents; ++agent) {
      const int r0 = dims_.input_offset(agent);
      const int nr = dims_.agent_input_total(agent);
      for (int o0 = 0; o0 < n; o0 += ad::kChunk) {
        const int ow = std::min(ad::kChunk, n - o0);
        for (int l = 0; l < ow; ++l) us[static_cast<std::size_t>(o0 + l)].d[l] = ad::D1(1.0);
        for (int i0 = 0; i0 < nr; i0 += ad::kChunk) {
          const int iw = std::min(ad::kChunk, nr - i0);
          for (int l = 0; l < iw; ++l) us[static_cast<std::size_t>(r0 + i0 + l)].v.d[l] = 1.0;
          std::vector<ad::D2> xs = roll(impl2_, us, gn);
          EvalView<ad::D2> view{&dims_, &xs, &us};
          ad::D2 y = impl2_.costs[static_cast<std::size_t>(agent)](view);
          int row = 0;
          for (const auto& blk : impl2_.blocks) {
            if (!blk.linear && block_has_active_multiplier(lambda, row, blk.rows)) {
              buf.resize(static_cast<std::size_t>(blk.rows));
              blk.eval(view, buf.data());
              for (int r = 0; r < blk.rows; ++r)
                if (lambda[row + r] != 0.0) y += lambda[row + r] * buf[static_cast<std::size_t>(r)];
            }
            row += blk.rows;
          }
          for (int ol = 0; ol < ow; ++ol)
            for (int il = 0; il < iw; ++il)
              hess(r0 + i0 + il, o0 + ol) = y.d[ol].d[il];
          for (int l = 0; l < iw; ++l) us[static_cast<std::size_t>(r0 + i0 + l)].v.d[l] = 0.0;
        }
        for (int l = 0; l < ow; ++l) us[static_cast<std::size_t>(o0 + l)].d[l] = ad::D1(0.0);
      }
    }
    return hess;
  }

 private:
  void check_u(const Eigen::VectorXd& u) const {
    if (u.size() != dims_.total_input_dim())
      throw ContractViolation("decision vector dimension mismatch");
  }

  static bool block_has_active_multiplier(const Eigen::VectorXd& lambda, int row0, int rows) {
    for (int r = 0; r < rows; ++r)
      if (lambda[row0 + r] != 0.0) return true;
    return false;
  }

  template <class S>
  std::vector<S> roll(const detail::GameImpl<S>& impl, const std::vector<S>& u,
                      bool gauss_newton) const {
    const int N = dims_.horizon;
    const int nx = dims_.state_dim;
    std::vector<S> xs(static_cast<std::size_t>((N + 1) * nx));
    for (int c = 0; c < nx; ++c) xs[static_cast<std::size_t>(c)] = S(x0_[c]);
    std::vector<S> xk(static_cast<std::size_t>(nx)), xn(static_cast<std::size_t>(nx));
    std::vector<S> uk(static_cast<std::size_t>(dims_.stage_input_dim()));
    for (int k = 0; k < N; ++k) {
      for (int c = 0; c < nx; ++c) xk[static_cast<std::size_t>(c)] = xs[static_cast<std::size_t>(k * nx + c)];
      for (int i = 0; i < dims_.num_agents; ++i) {
        const int mi = dims_.input_dim(i);
        for (int c = 0; c < mi; ++c)
          uk[static_cast<std::size_t>(dims_.stage_input_offset(i) + c)] =
              u[static_cast<std::size_t>(dims_.input_offset(i) + k * mi + c)];
      }
      impl.step(xk, uk, xn);
      if (gauss_newton)
        for (auto& s : xn) detail::truncate_second_order(s);
      for (int c = 0; c < nx; ++c) xs[static_cast<std::size_t>((k + 1) * nx + c)] = xn[static_cast<std::size_t>(c)];
    }
    return xs;
  }

  void finalize() {
    dims_.num_constraints = 0;
    for (const auto& blk : impl0_.blocks) {
      if (blk.rows < 0) throw ContractViolation("constraint block with negative rows");
      dims_.num_constraints += blk.rows;
    }
    dims_.validate();
    if (!impl0_.step) throw ContractViolation("game has no dynamics");
    if (static_cast<int>(impl0_.costs.size()) != dims_.num_agents)
      throw ContractViolation("cost count != num_agents");
    if (x0_.size() != dims_.state_dim)
      throw ContractViolation("initial state dimension mismatch");
    const int n = dims_.total_input_dim();
    if (lower_.size() != n || upper_.size() != n)
      throw ContractViolation("input bound dimension mismatch");
    if ((upper_ - lower_).minCoeff() <= 0.0)
      throw ContractViolation("input bounds must satisfy lower < upper");
    cache_linear_rows();
  }

  // One-time Jacobian of declared-linear blocks, evaluated at u = 0.
  // Linear blocks never read states, so no rollout is performed.
  void cache_linear_rows() {
    const int n = dims_.total_input_dim();
    auto us = ad::lift<ad::D1>(Eigen::VectorXd::Zero(n));
    std::vector<ad::D1> xs(static_cast<std::size_t>((dims_.horizon + 1) * dims_.state_dim),
                           ad::D1(0.0));
    EvalView<ad::D1> view{&dims_, &xs, &us};
    std::vector<ad::D1> buf;
    int row = 0;
    for (const auto& blk : impl1_.blocks) {
      if (!blk.linear) {
        row += blk.rows;
        continue;
      }
      LinearRows lin;
      lin.row0 = row;
      lin.jac.setZero(blk.rows, n);
      lin.offset.resize(blk.rows);
      for (int c0 = 0; c0 < n; c0 += ad::kChunk) {
        const int w = std::min(ad::kChunk, n - c0);
        for (int l = 0; l < w; ++l) us[static_cast<std::size_t>(c0 + l)].d[l] = 1.0;
        buf.resize(static_cast<std::size_t>(blk.rows));
        blk.eval(view, buf.data());
        for (int r = 0; r < blk.rows; ++r) {
          if (c0 == 0) lin.offset[r] = buf[static_cast<std::size_t>(r)].v;
          for (int l = 0; l < w; ++l) lin.jac(r, c0 + l) = buf[static_cast<std::size_t>(r)].d[l];
        }
        for (int l = 0; l < w; ++l) us[static_cast<std::size_t>(c0 + l)].d[l] = 0.0;
      }
      linear_rows_.push_back(std::move(lin));
      row += blk.rows;
    }
  }

  GameDimensions dims_;
  Eigen::VectorXd x0_, lower_, upper_;
  detail::GameImpl<double> impl0_;
  detail::GameImpl<ad::D1> impl1_;
  detail::GameImpl<ad::D2> impl2_;
  struct LinearRows {
    int row0 = 0;
    Eigen::MatrixXd jac;
    Eigen::VectorXd offset;
  };
  std::vector<LinearRows> linear_rows_;
};

}  // namespace dgsqp
