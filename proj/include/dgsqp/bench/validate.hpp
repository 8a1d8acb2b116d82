#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dgsqp/core/autodiff.hpp"
#include "dgsqp/core/finite_diff.hpp"
#include "dgsqp/core/game.hpp"
#include "dgsqp/racing/racing.hpp"
#include "dgsqp/racing/sampling.hpp"
#include "dgsqp/vehicles/vehicle.hpp"

// Cross-checks every analytic derivative in the stack against plain-double
// central finite differences: the four vehicle step maps and the full
// DerivativeBundle of both racing game families.
namespace dgsqp::bench {

struct ValidationEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;

  double worst() const {
    double w = 0.0;
    for (const auto& e : entries) w = std::max(w, e.max_rel_err);
    return w;
  }
  bool ok(double tol = 1e-4) const { return worst() <= tol; }
  std::string summary() const {
    std::string out;
    char buf[160];
    for (const auto& e : entries) {
      std::snprintf(buf, sizeof(buf), "%-40s max rel err %.3e\n", e.name.c_str(), e.max_rel_err);
      out += buf;
    }
    return out;
  }
};

namespace detail {

inline double rel_err(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& reference) {
  const double denom = std::max(1.0, reference.cwiseAbs().maxCoeff());
  return (analytic - reference).cwiseAbs().maxCoeff() / denom;
}

}  // namespace detail

// Jacobian of one RK4 step w.r.t. (x, u): dual-number forward mode vs central
// finite differences over the plain-double step.
inline double validate_model_derivatives(ModelKind kind, const ParametricTrack& track,
                                         const VehicleParams& p, int iterates,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int nx = state_dim(kind);
  const double L = track.total_length();
  double worst = 0.0;

  auto draw_state = [&]() {
    Eigen::VectorXd x(nx);
    if (is_dynamic(kind)) {
      x[0] = 1.0 + 0.6 * unit(rng);                      // v_x, well above floor
      x[1] = 0.25 * unit(rng);                           // v_y
      x[2] = 1.5 * unit(rng);                            // omega
      if (is_frenet(kind)) {
        x[3] = 0.5 * L * (1.0 + unit(rng)) * 0.5;        // s in [0, L/2]
        x[4] = 0.25 * unit(rng);                         // e_y
        x[5] = 0.4 * unit(rng);                          // e_psi
      } else {
        x[3] = 2.0 * unit(rng);
        x[4] = 2.0 * unit(rng);
        x[5] = 3.0 * unit(rng);
      }
    } else {
      x[0] = 1.0 + 0.7 * unit(rng);                      // v
      if (is_frenet(kind)) {
        x[1] = 0.5 * L * (1.0 + unit(rng)) * 0.5;
        x[2] = 0.25 * unit(rng);
        x[3] = 0.4 * unit(rng);
      } else {
        x[1] = 2.0 * unit(rng);
        x[2] = 2.0 * unit(rng);
        x[3] = 3.0 * unit(rng);
      }
    }
    return x;
  };
  auto draw_input = [&]() {
    Eigen::VectorXd u(2);
    u[0] = 0.5 * (p.a_min + p.a_max) + 0.4 * (p.a_max - p.a_min) * unit(rng);
    u[1] = 0.8 * p.delta_max * unit(rng);
    return u;
  };

  for (int it = 0; it < iterates; ++it) {
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXd x = draw_state(), u = draw_input();
      Eigen::VectorXd z(nx + 2);
      z << x, u;
      try {
        auto split = [&](const auto& zs) {
          using S = std::decay_t<decltype(zs[0])>;
          Eigen::Vector<S, Eigen::Dynamic> xs(nx), us(2);
          for (int i = 0; i < nx; ++i) xs[i] = zs[static_cast<std::size_t>(i)];
          for (int i = 0; i < 2; ++i) us[i] = zs[static_cast<std::size_t>(nx + i)];
          return step_model(kind, track, p, xs, us);
        };
        Eigen::MatrixXd J_ad = ad::jacobian(
            [&](const std::vector<ad::D1>& zs) {
              auto out = split(zs);
              return std::vector<ad::D1>(out.data(), out.data() + out.size());
            },
            z);
        const double h = 1e-6;
        Eigen::MatrixXd J_fd(nx, nx + 2);
        Eigen::VectorXd zp = z;
        for (int j = 0; j < nx + 2; ++j) {
          zp[j] = z[j] + h;
          Eigen::VectorXd fp =
              step_model<double>(kind, track, p, zp.head(nx), zp.tail(2));
          zp[j] = z[j] - h;
          Eigen::VectorXd fm =
              step_model<double>(kind, track, p, zp.head(nx), zp.tail(2));
          zp[j] = z[j];
          J_fd.col(j) = (fp - fm) / (2.0 * h);
        }
        worst = std::max(worst, detail::rel_err(J_ad, J_fd));
        break;
      } catch (const ModelError&) {
        if (attempt > 100) throw;
      }
    }
  }
  return worst;
}

struct GameBlockErrors {
  double cost_gradients = 0.0;
  double own_gradient = 0.0;
  double constraint_jacobian = 0.0;
  double lagrangian_hessian = 0.0;
};

// Every DerivativeBundle block at random interior iterates against the fd::
// oracles.  Draws are centered on u_base and retried with shrinking radius
// whenever the rollout leaves the model validity region.
inline GameBlockErrors validate_game_derivatives(const DynamicGame& g,
                                                 const Eigen::VectorXd& u_base, int iterates,
                                                 std::uint64_t seed) {
  const auto& d = g.dims();
  const int n = d.total_input_dim();
  const Eigen::VectorXd range = g.input_upper() - g.input_lower();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  GameBlockErrors err;

  for (int it = 0; it < iterates; ++it) {
    double scale = 0.25;
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXd u(n);
      for (int j = 0; j < n; ++j) u[j] = u_base[j] + scale * range[j] * unit(rng);
      Eigen::VectorXd lambda(d.num_constraints);
      for (int j = 0; j < d.num_constraints; ++j) lambda[j] = unif01(rng);
      try {
        DerivativeBundle b = g.eval_derivatives(u, lambda, HessianMode::Exact);

        Eigen::VectorXd own_fd(n);
        for (int i = 0; i < d.num_agents; ++i) {
          Eigen::VectorXd gi = fd::cost_gradient(g, i, u, 1e-5);
          err.cost_gradients = std::max(
              err.cost_gradients, detail::rel_err(b.cost_gradients.row(i).transpose(), gi));
          own_fd.segment(d.input_offset(i), d.agent_input_total(i)) =
              gi.segment(d.input_offset(i), d.agent_input_total(i));
        }
        err.own_gradient = std::max(err.own_gradient, detail::rel_err(b.own_gradient, own_fd));

        Eigen::MatrixXd J_fd = fd::constraint_jacobian(g, u, 1e-5);
        err.constraint_jacobian =
            std::max(err.constraint_jacobian, detail::rel_err(b.constraint_jacobian, J_fd));

        for (int i = 0; i < d.num_agents; ++i) {
          Eigen::MatrixXd Hi = fd::lagrangian_hessian(g, i, u, lambda, 1e-4);
          err.lagrangian_hessian = std::max(
              err.lagrangian_hessian,
              detail::rel_err(
                  b.lagrangian_hessian.middleRows(d.input_offset(i), d.agent_input_total(i)),
                  Hi.middleRows(d.input_offset(i), d.agent_input_total(i))));
        }
        break;
      } catch (const ModelError&) {
        if (attempt > 100) throw;
        scale *= 0.5;
      }
    }
  }
  return err;
}

// Full sweep used by both the CLI and the acceptance suite: four vehicle
// models plus the exact and approximate racing game families.
inline ValidationReport run_derivative_validation(const ParametricTrack& track,
                                                  const VehicleParams& p1,
                                                  const VehicleParams& p2,
                                                  const RacingWeights& weights, int iterates,
                                                  std::uint64_t seed) {
  ValidationReport rep;
  std::uint64_t stream = seed;
  for (ModelKind kind : {ModelKind::KinematicFrenet, ModelKind::DynamicFrenet,
                         ModelKind::KinematicInertial, ModelKind::DynamicInertial}) {
    rep.entries.push_back({std::string("model ") + to_string(kind),
                           validate_model_derivatives(kind, track, p1, iterates, ++stream)});
  }

  RacingIc ic;
  ic.v = {1.0, 1.0};
  ic.s = {0.3, 1.5};
  ic.e_y = {0.1, -0.1};
  const int N = 8;

  DynamicGame exact =
      build_exact_game(track, p1, p2, weights, ic.exact_state(false), N, false);
  Eigen::VectorXd base_exact = Eigen::VectorXd::Zero(exact.dims().total_input_dim());
  GameBlockErrors ee = validate_game_derivatives(exact, base_exact, iterates, ++stream);

  DynamicGame approx =
      build_approx_game(track, p1, p2, weights, ic.approx_state(track, false), N, false);
  Eigen::VectorXd base_approx = Eigen::VectorXd::Zero(approx.dims().total_input_dim());
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < N; ++k) base_approx[i * 3 * N + 3 * k + 2] = ic.v[static_cast<std::size_t>(i)];
  GameBlockErrors ea = validate_game_derivatives(approx, base_approx, iterates, ++stream);

  auto push = [&](const char* family, const GameBlockErrors& e) {
    rep.entries.push_back({std::string(family) + " cost_gradients", e.cost_gradients});
    rep.entries.push_back({std::string(family) + " own_gradient", e.own_gradient});
    rep.entries.push_back({std::string(family) + " constraint_jacobian", e.constraint_jacobian});
    rep.entries.push_back({std::string(family) + " lagrangian_hessian", e.lagrangian_hessian});
  };
  push("game exact", ee);
  push("game approximate", ea);
  return rep;
}

}  // namespace dgsqp::bench
