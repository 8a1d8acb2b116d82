#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <random>

#include "dgsqp/core/finite_diff.hpp"
#include "dgsqp/core/game.hpp"
#include "lq_game.hpp"
#include "toy_games.hpp"

using namespace dgsqp;

namespace {

DynamicGame make_single_integrator(int N) {
  GameDimensions dims;
  dims.num_agents = 1;
  dims.horizon = N;
  dims.state_dim = 1;
  dims.input_dims = {1};
  Eigen::VectorXd x0(1);
  x0 << 0.5;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(N, -10.0);
  Eigen::VectorXd up = Eigen::VectorXd::Constant(N, 10.0);
  return DynamicGame(dims, x0, lo, up, [](auto& b) {
    b.set_step([](const auto& x, const auto& u, auto& xn) { xn[0] = x[0] + 0.1 * u[0]; });
    b.add_cost([](const auto& v) { return v.x(v.dims->horizon, 0) * v.x(v.dims->horizon, 0); });
  });
}

}  // namespace

TEST_CASE("rollout reproduces integrator cumulative sums") {
  auto g = make_single_integrator(6);
  Eigen::VectorXd u(6);
  u << 1.0, -2.0, 0.5, 3.0, 0.0, -1.0;
  Eigen::MatrixXd xs = g.rollout(u);
  double acc = 0.5;
  CHECK(xs(0, 0) == acc);
  for (int k = 0; k < 6; ++k) {
    acc += 0.1 * u[k];
    CHECK(xs(k + 1, 0) == Catch::Approx(acc).margin(1e-15));
  }
}

TEST_CASE("zero input keeps a drift-free game at its initial state") {
  testutil::LqGameSpec s;
  s.x0 << 0.7, 0.0, -0.4, 0.0;  // zero velocities: x is a fixed point under u = 0
  auto g = testutil::make_lq_game(s);
  Eigen::MatrixXd xs = g.rollout(Eigen::VectorXd::Zero(10));
  for (int k = 0; k <= s.horizon; ++k) {
    CHECK(xs(k, 0) == 0.7);
    CHECK(xs(k, 2) == -0.4);
  }
}

TEST_CASE("rollouts are bit identical across repeated evaluation") {
  auto g = testutil::make_nonlinear_toy();
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(12, -0.8, 0.9);
  Eigen::MatrixXd a = g.rollout(u);
  Eigen::MatrixXd b = g.rollout(u);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
}

TEST_CASE("contract violations are reported") {
  auto g = testutil::make_nonlinear_toy();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(12);
  CHECK_THROWS_AS(g.rollout(Eigen::VectorXd::Zero(5)), ContractViolation);
  CHECK_THROWS_AS(g.eval_cost(2, u), ContractViolation);
  CHECK_THROWS_AS(g.eval_cost(-1, u), ContractViolation);
  CHECK_THROWS_AS(g.eval_derivatives(u, Eigen::VectorXd::Zero(3)), ContractViolation);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(g.dims().num_constraints);
  bad[1] = -0.5;
  CHECK_THROWS_AS(g.eval_derivatives(u, bad), ContractViolation);
}

TEST_CASE("derivative bundle matches finite differences on a nonlinear game") {
  auto g = testutil::make_nonlinear_toy();
  const int n = g.dims().total_input_dim();
  const int nc = g.dims().num_constraints;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> du(-0.6, 0.6), dl(0.0, 0.8);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = du(rng);
    Eigen::VectorXd lambda(nc);
    for (int i = 0; i < nc; ++i) lambda[i] = dl(rng);
    DerivativeBundle bundle = g.eval_derivatives(u, lambda);

    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXd fdg = fd::cost_gradient(g, i, u);
      CHECK((bundle.cost_gradients.row(i).transpose() - fdg).cwiseAbs().maxCoeff() < 1e-7);
    }
    Eigen::MatrixXd fdJ = fd::constraint_jacobian(g, u);
    CHECK((bundle.constraint_jacobian - fdJ).cwiseAbs().maxCoeff() < 1e-7);
    for (int i = 0; i < 2; ++i) {
      Eigen::MatrixXd fdH = fd::lagrangian_hessian(g, i, u, lambda);
      const int r0 = g.dims().input_offset(i);
      const int nr = g.dims().agent_input_total(i);
      Eigen::MatrixXd adH = bundle.lagrangian_hessian.middleRows(r0, nr);
      const double scale = std::max(1.0, fdH.middleRows(r0, nr).cwiseAbs().maxCoeff());
      CHECK((adH - fdH.middleRows(r0, nr)).cwiseAbs().maxCoeff() < 1e-4 * scale);
    }
    // Constraint values agree with the plain evaluation path.
    CHECK((bundle.constraints - g.eval_constraints(u)).cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < 2; ++i)
      CHECK(bundle.costs[i] == Catch::Approx(g.eval_cost(i, u)).epsilon(1e-13));
  }
}

TEST_CASE("own gradient stacks the agent blocks of the full gradients") {
  auto g = testutil::make_nonlinear_toy();
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(12, -0.5, 0.5);
  FirstOrderEval fo = g.eval_first_order(u);
  for (int i = 0; i < 2; ++i) {
    const int off = g.dims().input_offset(i);
    const int len = g.dims().agent_input_total(i);
    CHECK((fo.own_gradient.segment(off, len).transpose() -
           fo.cost_gradients.row(i).segment(off, len))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("zero multipliers reduce the Hessian to pure cost curvature") {
  auto g = testutil::make_nonlinear_toy();
  const int nc = g.dims().num_constraints;
  Eigen::VectorXd u = Eigen::VectorXd::Constant(12, 0.15);
  DerivativeBundle with0 = g.eval_derivatives(u, Eigen::VectorXd::Zero(nc));
  for (int i = 0; i < 2; ++i) {
    Eigen::MatrixXd fdH = fd::lagrangian_hessian(g, i, u, Eigen::VectorXd::Zero(nc));
    const int r0 = g.dims().input_offset(i);
    const int nr = g.dims().agent_input_total(i);
    CHECK((with0.lagrangian_hessian.middleRows(r0, nr) - fdH.middleRows(r0, nr))
              .cwiseAbs()
              .maxCoeff() < 2e-5);
  }
}

TEST_CASE("declared linear blocks have constant Jacobian rows") {
  auto g = testutil::make_nonlinear_toy();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> du(-1.0, 1.0);
  Eigen::MatrixXd Jref;
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd u(12);
    for (int i = 0; i < 12; ++i) u[i] = du(rng);
    Eigen::MatrixXd J = g.eval_first_order(u).constraint_jacobian.topRows(8);
    if (trial == 0)
      Jref = J;
    else
      CHECK((J - Jref).cwiseAbs().maxCoeff() == 0.0);
    CHECK((J - fd::constraint_jacobian(g, u).topRows(8)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("LQ game Hessian is constant and asymmetric across agents") {
  testutil::LqGameSpec s;
  auto g = testutil::make_lq_game(s);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(10);
  Eigen::VectorXd l0(0);
  DerivativeBundle a = g.eval_derivatives(Eigen::VectorXd::Random(10), l0);
  DerivativeBundle b = g.eval_derivatives(Eigen::VectorXd::Random(10), l0);
  CHECK((a.lagrangian_hessian - b.lagrangian_hessian).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.lagrangian_hessian - a.lagrangian_hessian.transpose()).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("gauss newton mode is exact for linear dynamics and differs otherwise") {
  testutil::LqGameSpec s;
  auto lq = testutil::make_lq_game(s);
  Eigen::VectorXd u = Eigen::VectorXd::Constant(10, 0.3);
  Eigen::VectorXd l0(0);
  DerivativeBundle ex = lq.eval_derivatives(u, l0, HessianMode::Exact);
  DerivativeBundle gn = lq.eval_derivatives(u, l0, HessianMode::GaussNewton);
  CHECK((ex.lagrangian_hessian - gn.lagrangian_hessian).cwiseAbs().maxCoeff() < 1e-12);

  auto toy = testutil::make_nonlinear_toy();
  Eigen::VectorXd ut = Eigen::VectorXd::Constant(12, 0.25);
  Eigen::VectorXd lt = Eigen::VectorXd::Zero(toy.dims().num_constraints);
  DerivativeBundle ex2 = toy.eval_derivatives(ut, lt, HessianMode::Exact);
  DerivativeBundle gn2 = toy.eval_derivatives(ut, lt, HessianMode::GaussNewton);
  CHECK((ex2.lagrangian_hessian - gn2.lagrangian_hessian).cwiseAbs().maxCoeff() > 1e-6);
}
