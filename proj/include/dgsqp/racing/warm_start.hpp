#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "dgsqp/racing/racing.hpp"
#include "dgsqp/racing/sampling.hpp"
#include "dgsqp/solver/dgsqp.hpp"

namespace dgsqp {

struct WarmStart {
  Eigen::VectorXd u;
  bool ok = false;
};

namespace detail {

struct PidGains {
  double kv = 1.0;
  double ky = 0.8;
  double kpsi = 1.5;
  double komega = 0.05;
};

inline double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

// Frenet PID rollout for one agent: hold the initial speed and lateral offset.
// On a model error or a rollout that leaves the track by more than twice its
// width, returns zero inputs with ok = false.
inline bool pid_rollout_frenet(const ParametricTrack& track,
                               const VehicleParams& p, double v0, double s0,
                               double ey0, int N, bool dynamic_model,
                               Eigen::VectorXd& u,
                               Eigen::MatrixXd* states = nullptr) {
  const PidGains g;
  const int nx = dynamic_model ? 6 : 4;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nx);
  if (dynamic_model) {
    x[0] = v0; x[3] = s0; x[4] = ey0;
  } else {
    x[0] = v0; x[1] = s0; x[2] = ey0;
  }
  u = Eigen::VectorXd::Zero(2 * N);
  if (states) {
    states->resize(N + 1, nx);
    states->row(0) = x.transpose();
  }
  Eigen::VectorXd xn(nx);
  for (int k = 0; k < N; ++k) {
    double v = x[0];
    double ey = dynamic_model ? x[4] : x[2];
    double epsi = dynamic_model ? x[5] : x[3];
    double a = clamp(g.kv * (v0 - v), p.a_min, p.a_max);
    double delta = -g.ky * (ey - ey0) - g.kpsi * epsi;
    if (dynamic_model) delta -= g.komega * x[2];
    delta = clamp(delta, -p.delta_max, p.delta_max);
    Eigen::Vector2d uk(a, delta);
    try {
      if (dynamic_model) {
        step_dynamic_frenet(track, p, x.data(), uk.data(), xn.data(), p.dt);
      } else {
        step_kinematic_frenet(track, p, x.data(), uk.data(), xn.data(), p.dt);
      }
    } catch (const ModelError&) {
      u.setZero();
      return false;
    }
    x = xn;
    double s_now = dynamic_model ? x[3] : x[1];
    double ey_now = dynamic_model ? x[4] : x[2];
    double width = track.width_left(s_now) + track.width_right(s_now);
    if (std::abs(ey_now) > 2.0 * width) {
      u.setZero();
      return false;
    }
    u[2 * k] = a;
    u[2 * k + 1] = delta;
    if (states) states->row(k + 1) = x.transpose();
  }
  return true;
}

// Inertial PID rollout for one agent of the approximation: same feedback law,
// but the pose is recovered from the projection onto the centerline and the
// virtual arc speed input is set to the current longitudinal speed.
inline bool pid_rollout_inertial(const ParametricTrack& track,
                                 const VehicleParams& p, double v0, double s0,
                                 double ey0, int N, bool dynamic_model,
                                 double v_cap, Eigen::VectorXd& u) {
  const PidGains g;
  const int nx = dynamic_model ? 6 : 4;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nx);
  double px, py;
  track.frenet_to_inertial(s0, ey0, px, py);
  double psi0 = track.heading(s0);
  if (dynamic_model) {
    x[0] = v0; x[3] = px; x[4] = py; x[5] = psi0;
  } else {
    x[0] = v0; x[1] = px; x[2] = py; x[3] = psi0;
  }
  u = Eigen::VectorXd::Zero(3 * N);
  Eigen::VectorXd xn(nx);
  for (int k = 0; k < N; ++k) {
    double v = x[0];
    double cx = dynamic_model ? x[3] : x[1];
    double cy = dynamic_model ? x[4] : x[2];
    double cpsi = dynamic_model ? x[5] : x[3];
    FrenetPose fp = track.frenet_pose(cx, cy, cpsi);
    double width = track.width_left(fp.s) + track.width_right(fp.s);
    if (std::abs(fp.e_y) > 2.0 * width) {
      u.setZero();
      return false;
    }
    double a = clamp(g.kv * (v0 - v), p.a_min, p.a_max);
    double delta = -g.ky * (fp.e_y - ey0) - g.kpsi * fp.e_psi;
    if (dynamic_model) delta -= g.komega * x[2];
    delta = clamp(delta, -p.delta_max, p.delta_max);
    Eigen::Vector2d uk(a, delta);
    try {
      if (dynamic_model) {
        step_dynamic_inertial(p, x.data(), uk.data(), xn.data(), p.dt);
      } else {
        step_kinematic_inertial(p, x.data(), uk.data(), xn.data(), p.dt);
      }
    } catch (const ModelError&) {
      u.setZero();
      return false;
    }
    u[3 * k] = a;
    u[3 * k + 1] = delta;
    u[3 * k + 2] = clamp(v, -v_cap, v_cap);
    x = xn;
  }
  return true;
}

}  // namespace detail

// PID warm start for the joint two-agent input vector of the racing games.
inline WarmStart warm_start_pid(const ParametricTrack& track,
                                const VehicleParams& p1,
                                const VehicleParams& p2, const RacingIc& ic,
                                int N, bool dynamic_model, bool approximate,
                                double v_cap = 3.0) {
  if (N < 1) throw ContractViolation("warm_start_pid: N < 1");
  const int mi = approximate ? 3 : 2;
  WarmStart ws;
  ws.u = Eigen::VectorXd::Zero(2 * mi * N);
  ws.ok = true;
  const VehicleParams* params[2] = {&p1, &p2};
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd ui;
    bool ok_i;
    if (approximate) {
      ok_i = detail::pid_rollout_inertial(track, *params[i], ic.v[i], ic.s[i],
                                          ic.e_y[i], N, dynamic_model, v_cap, ui);
    } else {
      ok_i = detail::pid_rollout_frenet(track, *params[i], ic.v[i], ic.s[i],
                                        ic.e_y[i], N, dynamic_model, ui);
    }
    ws.u.segment(i * mi * N, mi * N) = ui;
    ws.ok = ws.ok && ok_i;
  }
  return ws;
}

// Tracking warm start: each agent solves its own single-agent raceline
// tracking problem (itself warm started by the PID rollout). Falls back to
// the PID inputs when the tracking solve does not converge.
inline WarmStart warm_start_tracking(const ParametricTrack& track,
                                     const Raceline& raceline,
                                     const VehicleParams& p1,
                                     const VehicleParams& p2,
                                     const RacingIc& ic, int N,
                                     bool dynamic_model, bool approximate,
                                     double v_cap = 3.0,
                                     solver::SolverConfig cfg = {}) {
  if (N < 1) throw ContractViolation("warm_start_tracking: N < 1");
  const int mi = approximate ? 3 : 2;
  WarmStart ws;
  ws.u = Eigen::VectorXd::Zero(2 * mi * N);
  ws.ok = true;
  cfg.max_iter = std::min(cfg.max_iter, 100);
  const VehicleParams* params[2] = {&p1, &p2};
  for (int i = 0; i < 2; ++i) {
    const VehicleParams& p = *params[i];
    const int nx = dynamic_model ? 6 : 4;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nx);
    if (dynamic_model) {
      x0[0] = ic.v[i]; x0[3] = ic.s[i]; x0[4] = ic.e_y[i];
    } else {
      x0[0] = ic.v[i]; x0[1] = ic.s[i]; x0[2] = ic.e_y[i];
    }
    Eigen::VectorXd u_pid;
    bool pid_ok = detail::pid_rollout_frenet(track, p, ic.v[i], ic.s[i],
                                             ic.e_y[i], N, dynamic_model, u_pid);
    Eigen::VectorXd u_frenet = u_pid;
    bool agent_ok = pid_ok;
    DynamicGame game = build_tracking_game(track, p, raceline, x0, N, dynamic_model);
    solver::SolveResult res = solver::solve(game, u_pid, cfg);
    if (res.status == solver::SolveStatus::Converged) {
      u_frenet = res.u;
      agent_ok = true;
    }
    if (!approximate) {
      ws.u.segment(i * mi * N, mi * N) = u_frenet;
    } else {
      // Re-express the Frenet tracking solution in the approximate input
      // space: same (a, delta), arc speed from the rolled-out speeds.
      Eigen::MatrixXd xs;
      bool have_xs = true;
      try {
        xs = game.rollout(u_frenet);
      } catch (const ModelError&) {
        have_xs = false;
        agent_ok = false;
      }
      for (int k = 0; k < N; ++k) {
        double vk = have_xs ? xs(k, 0) : ic.v[i];
        ws.u[i * mi * N + 3 * k] = u_frenet[2 * k];
        ws.u[i * mi * N + 3 * k + 1] = u_frenet[2 * k + 1];
        ws.u[i * mi * N + 3 * k + 2] = detail::clamp(vk, -v_cap, v_cap);
      }
    }
    ws.ok = ws.ok && agent_ok;
  }
  return ws;
}

}  // namespace dgsqp
