#pragma once

#include <array>
#include <cmath>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

#include "dgsqp/core/game.hpp"
#include "dgsqp/racing/raceline.hpp"
#include "dgsqp/tracks/track.hpp"
#include "dgsqp/vehicles/vehicle.hpp"

namespace dgsqp {

enum class CompetitionForm { Squared, Linear };

inline CompetitionForm competition_form_from_string(const std::string& s) {
  if (s == "squared") return CompetitionForm::Squared;
  if (s == "linear") return CompetitionForm::Linear;
  throw std::runtime_error("racing: unknown competition form '" + s + "'");
}

struct AgentWeights {
  Eigen::Vector2d R{0.1, 0.1};   // quadratic input penalty (diag)
  Eigen::Vector2d P{1.0, 1.0};   // input rate penalty (diag)
  double q1 = 1.0;               // weight on agent 1's terminal progress
  double q2 = 1.0;               // weight on agent 2's terminal progress
  Eigen::Vector2d u_prev{0.0, 0.0};  // u_{-1} for the k = 0 rate term
};

struct RacingWeights {
  std::array<AgentWeights, 2> agents;
  double q_l = 1e3;    // lag-error weight (approximate games)
  double v_max = 3.0;  // arcspeed bound (approximate games)
  CompetitionForm competition = CompetitionForm::Squared;

  void validate() const {
    for (const auto& a : agents) {
      if (!((a.R.array() >= 0.0).all() && (a.P.array() >= 0.0).all())) {
        throw ContractViolation("RacingWeights: R, P must be PSD (diag >= 0)");
      }
      // Racing configs use strictly positive weights; zero is allowed so the
      // game can be decoupled into independent tracking problems.
      if (!(a.q1 >= 0.0 && a.q2 >= 0.0)) {
        throw ContractViolation("RacingWeights: q1, q2 must be nonnegative");
      }
    }
    if (!(q_l > 0.0)) throw ContractViolation("RacingWeights: q_l must be positive");
    if (!(v_max > 0.0)) throw ContractViolation("RacingWeights: v_max must be positive");
  }
};

// Contouring-frame errors of Eq.-level definitions: rotation of p - tau(s_bar)
// into the path frame at s_bar. e_l is the (negated) longitudinal component,
// e_c the lateral one.
template <class S>
S lag_error(const ParametricTrack& track, const S& px, const S& py,
            const S& s_bar) {
  using std::cos;
  using std::sin;
  S phi = track.heading(s_bar);
  S tx, ty;
  track.position(s_bar, tx, ty);
  return -cos(phi) * (px - tx) - sin(phi) * (py - ty);
}

template <class S>
S contour_error(const ParametricTrack& track, const S& px, const S& py,
                const S& s_bar) {
  using std::cos;
  using std::sin;
  S phi = track.heading(s_bar);
  S tx, ty;
  track.position(s_bar, tx, ty);
  return -sin(phi) * (px - tx) + cos(phi) * (py - ty);
}

namespace detail {

// True when every segment carries the same symmetric width, in which case
// the track boundary compresses to one quadratic row e^2 - w^2 <= 0 per
// stage; otherwise the two-sided form with per-arclength widths is used.
inline bool uniform_symmetric_width(const ParametricTrack& track) {
  double w = track.segments().front().w_left;
  for (const auto& g : track.segments()) {
    if (g.w_left != w || g.w_right != w) return false;
  }
  return true;
}

inline double competition_own_weight(const RacingWeights& w, int agent) {
  return agent == 0 ? w.agents[0].q1 : w.agents[1].q2;
}
inline double competition_opp_weight(const RacingWeights& w, int agent) {
  return agent == 0 ? w.agents[0].q2 : w.agents[1].q1;
}

}  // namespace detail

// Joint Frenet-frame racing game of the exact formulation. x0 stacks the two
// agents' Frenet states ((v,s,e_y,e_psi) or (v_x,v_y,omega,s,e_y,e_psi)).
// Constraint layout: input boxes (agent 1, agent 2), track boundaries
// (agent 1, agent 2; stages 1..N), shared collision rows (stages 1..N).
inline DynamicGame build_exact_game(const ParametricTrack& track,
                                    const VehicleParams& p1,
                                    const VehicleParams& p2,
                                    const RacingWeights& weights,
                                    const Eigen::VectorXd& x0, int N,
                                    bool dynamic_model) {
  weights.validate();
  p1.validate();
  p2.validate();
  const int nxa = dynamic_model ? 6 : 4;  // per-agent state size
  const int s_idx = dynamic_model ? 3 : 1;
  const int ey_idx = dynamic_model ? 4 : 2;
  if (x0.size() != 2 * nxa) {
    throw ContractViolation("build_exact_game: x0 has wrong dimension");
  }

  GameDimensions dims;
  dims.num_agents = 2;
  dims.horizon = N;
  dims.state_dim = 2 * nxa;
  dims.input_dims = {2, 2};

  const std::array<VehicleParams, 2> params{p1, p2};

  // Initial feasibility: inside the track and collision-free.
  {
    double pos[2][2];
    for (int i = 0; i < 2; ++i) {
      double s0 = x0[i * nxa + s_idx], ey0 = x0[i * nxa + ey_idx];
      if (ey0 > track.width_left(s0) || -ey0 > track.width_right(s0)) {
        throw ContractViolation("build_exact_game: x0 outside track bounds");
      }
      track.frenet_to_inertial(s0, ey0, pos[i][0], pos[i][1]);
    }
    double rr = params[0].radius + params[1].radius;
    if (std::hypot(pos[0][0] - pos[1][0], pos[0][1] - pos[1][1]) <= rr) {
      throw ContractViolation("build_exact_game: x0 is in collision");
    }
  }

  Eigen::VectorXd lo(4 * N), up(4 * N);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < N; ++k) {
      lo[i * 2 * N + 2 * k + 0] = params[i].a_min;
      up[i * 2 * N + 2 * k + 0] = params[i].a_max;
      lo[i * 2 * N + 2 * k + 1] = -params[i].delta_max;
      up[i * 2 * N + 2 * k + 1] = params[i].delta_max;
    }
  }

  const bool symmetric = detail::uniform_symmetric_width(track);
  const double rr2 = std::pow(p1.radius + p2.radius, 2);

  return DynamicGame(dims, x0, lo, up, [=](auto& b) {
    b.set_step([=](const auto& x, const auto& u, auto& xn) {
      for (int i = 0; i < 2; ++i) {
        if (dynamic_model) {
          step_dynamic_frenet(track, params[i], x.data() + i * 6, u.data() + i * 2,
                              xn.data() + i * 6, params[i].dt);
        } else {
          step_kinematic_frenet(track, params[i], x.data() + i * 4,
                                u.data() + i * 2, xn.data() + i * 4,
                                params[i].dt);
        }
      }
    });
    for (int i = 0; i < 2; ++i) {
      const AgentWeights aw = weights.agents[i];
      const double q_own = detail::competition_own_weight(weights, i);
      const double q_opp = detail::competition_opp_weight(weights, i);
      const auto comp = weights.competition;
      const int own_s = i * nxa + s_idx;
      const int opp_s = (1 - i) * nxa + s_idx;
      b.add_cost([=](const auto& v) {
        auto acc = v.x(0, 0) * 0.0;
        for (int k = 0; k < v.dims->horizon; ++k) {
          for (int c = 0; c < 2; ++c) {
            auto uc = v.input(i, k, c);
            acc += aw.R[c] * uc * uc;
            auto du = k == 0 ? uc - aw.u_prev[c] : uc - v.input(i, k - 1, c);
            acc += aw.P[c] * du * du;
          }
        }
        auto s_own = v.x(v.dims->horizon, own_s);
        auto s_opp = v.x(v.dims->horizon, opp_s);
        if (comp == CompetitionForm::Squared) {
          acc += q_opp * s_opp * s_opp - q_own * s_own;
        } else {
          acc += q_opp * s_opp - q_own * s_own;
        }
        return acc;
      });
    }
    // Input boxes, one linear block per agent (stages 0..N-1, both sides).
    for (int i = 0; i < 2; ++i) {
      const VehicleParams p = params[i];
      b.add_constraint_block(4 * N, true, [=](const auto& v, auto* out) {
        int r = 0;
        for (int k = 0; k < v.dims->horizon; ++k) {
          out[r++] = v.input(i, k, 0) - p.a_max;
          out[r++] = p.a_min - v.input(i, k, 0);
          out[r++] = v.input(i, k, 1) - p.delta_max;
          out[r++] = -p.delta_max - v.input(i, k, 1);
        }
      });
    }
    // Track boundaries per agent, stages 1..N.
    for (int i = 0; i < 2; ++i) {
      const int sj = i * nxa + s_idx;
      const int ej = i * nxa + ey_idx;
      if (symmetric) {
        const double w = track.segments().front().w_left;
        b.add_constraint_block(N, false, [=](const auto& v, auto* out) {
          for (int k = 1; k <= v.dims->horizon; ++k) {
            auto ey = v.x(k, ej);
            out[k - 1] = ey * ey - w * w;
          }
        });
      } else {
        b.add_constraint_block(2 * N, false, [=](const auto& v, auto* out) {
          int r = 0;
          for (int k = 1; k <= v.dims->horizon; ++k) {
            auto s = v.x(k, sj);
            auto ey = v.x(k, ej);
            out[r++] = ey - track.width_left(s);
            out[r++] = -track.width_right(s) - ey;
          }
        });
      }
    }
    // Shared collision rows, stages 1..N; p^i reconstructed from (s, e_y).
    b.add_constraint_block(N, false, [=](const auto& v, auto* out) {
      using std::cos;
      using std::sin;
      using Sc = std::decay_t<decltype(v.x(0, 0))>;
      for (int k = 1; k <= v.dims->horizon; ++k) {
        auto reconstruct = [&](int agent, Sc& px, Sc& py) {
          Sc s = v.x(k, agent * nxa + s_idx);
          Sc ey = v.x(k, agent * nxa + ey_idx);
          Sc phi = track.heading(s);
          Sc tx, ty;
          track.position(s, tx, ty);
          px = tx - ey * sin(phi);
          py = ty + ey * cos(phi);
        };
        Sc ax, ay, bx, by;
        reconstruct(0, ax, ay);
        reconstruct(1, bx, by);
        Sc dx = ax - bx;
        Sc dy = ay - by;
        out[k - 1] = rr2 - dx * dx - dy * dy;
      }
    });
  });
}

// Contouring-approximation game: inertial dynamics augmented per agent with
// the progress integrator s_bar' = s_bar + dt*v_bar. x0 stacks augmented
// agent states (inertial state, s_bar0). Constraint layout matches the exact
// game with e_y -> e_c, plus trailing arcspeed bound rows per agent.
inline DynamicGame build_approx_game(const ParametricTrack& track,
                                     const VehicleParams& p1,
                                     const VehicleParams& p2,
                                     const RacingWeights& weights,
                                     const Eigen::VectorXd& x0, int N,
                                     bool dynamic_model) {
  weights.validate();
  p1.validate();
  p2.validate();
  const int nxb = dynamic_model ? 6 : 4;  // inertial state size
  const int nxa = nxb + 1;                // plus s_bar
  const int x_idx = dynamic_model ? 3 : 1;
  if (x0.size() != 2 * nxa) {
    throw ContractViolation("build_approx_game: x0 has wrong dimension");
  }

  GameDimensions dims;
  dims.num_agents = 2;
  dims.horizon = N;
  dims.state_dim = 2 * nxa;
  dims.input_dims = {3, 3};

  const std::array<VehicleParams, 2> params{p1, p2};

  {
    double rr = p1.radius + p2.radius;
    double dx = x0[x_idx] - x0[nxa + x_idx];
    double dy = x0[x_idx + 1] - x0[nxa + x_idx + 1];
    if (std::hypot(dx, dy) <= rr) {
      throw ContractViolation("build_approx_game: x0 is in collision");
    }
    for (int i = 0; i < 2; ++i) {
      double px = x0[i * nxa + x_idx], py = x0[i * nxa + x_idx + 1];
      FrenetPose fp = track.frenet_pose(px, py, 0.0);
      if (fp.e_y > track.width_left(fp.s) || -fp.e_y > track.width_right(fp.s)) {
        throw ContractViolation("build_approx_game: x0 outside track bounds");
      }
    }
  }

  Eigen::VectorXd lo(6 * N), up(6 * N);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < N; ++k) {
      int base = i * 3 * N + 3 * k;
      lo[base + 0] = params[i].a_min;
      up[base + 0] = params[i].a_max;
      lo[base + 1] = -params[i].delta_max;
      up[base + 1] = params[i].delta_max;
      lo[base + 2] = -weights.v_max;
      up[base + 2] = weights.v_max;
    }
  }

  const bool symmetric = detail::uniform_symmetric_width(track);
  const double rr2 = std::pow(p1.radius + p2.radius, 2);
  const double q_l = weights.q_l;
  const double v_max = weights.v_max;

  return DynamicGame(dims, x0, lo, up, [=](auto& b) {
    b.set_step([=](const auto& x, const auto& u, auto& xn) {
      for (int i = 0; i < 2; ++i) {
        const auto* xi = x.data() + i * nxa;
        const auto* ui = u.data() + i * 3;
        auto* xo = xn.data() + i * nxa;
        if (dynamic_model) {
          step_dynamic_inertial(params[i], xi, ui, xo, params[i].dt);
        } else {
          step_kinematic_inertial(params[i], xi, ui, xo, params[i].dt);
        }
        xo[nxb] = xi[nxb] + params[i].dt * ui[2];  // s_bar integrator
      }
    });
    for (int i = 0; i < 2; ++i) {
      const AgentWeights aw = weights.agents[i];
      const double q_own = detail::competition_own_weight(weights, i);
      const double q_opp = detail::competition_opp_weight(weights, i);
      const auto comp = weights.competition;
      const int own_s = i * nxa + nxb;
      const int opp_s = (1 - i) * nxa + nxb;
      const int pxj = i * nxa + x_idx;
      b.add_cost([=](const auto& v) {
        auto acc = v.x(0, 0) * 0.0;
        for (int k = 0; k < v.dims->horizon; ++k) {
          for (int c = 0; c < 2; ++c) {
            auto uc = v.input(i, k, c);
            acc += aw.R[c] * uc * uc;
            auto du = k == 0 ? uc - aw.u_prev[c] : uc - v.input(i, k - 1, c);
            acc += aw.P[c] * du * du;
          }
        }
        for (int k = 1; k <= v.dims->horizon; ++k) {
          auto el = lag_error(track, v.x(k, pxj), v.x(k, pxj + 1), v.x(k, own_s));
          acc += q_l * el * el;
        }
        auto s_own = v.x(v.dims->horizon, own_s);
        auto s_opp = v.x(v.dims->horizon, opp_s);
        if (comp == CompetitionForm::Squared) {
          acc += q_opp * s_opp * s_opp - q_own * s_own;
        } else {
          acc += q_opp * s_opp - q_own * s_own;
        }
        return acc;
      });
    }
    // Input boxes on (a, delta) to mirror the exact game's block layout.
    for (int i = 0; i < 2; ++i) {
      const VehicleParams p = params[i];
      b.add_constraint_block(4 * N, true, [=](const auto& v, auto* out) {
        int r = 0;
        for (int k = 0; k < v.dims->horizon; ++k) {
          out[r++] = v.input(i, k, 0) - p.a_max;
          out[r++] = p.a_min - v.input(i, k, 0);
          out[r++] = v.input(i, k, 1) - p.delta_max;
          out[r++] = -p.delta_max - v.input(i, k, 1);
        }
      });
    }
    // Track boundaries with e_y replaced by the contouring error.
    for (int i = 0; i < 2; ++i) {
      const int pxj = i * nxa + x_idx;
      const int sj = i * nxa + nxb;
      if (symmetric) {
        const double w = track.segments().front().w_left;
        b.add_constraint_block(N, false, [=](const auto& v, auto* out) {
          for (int k = 1; k <= v.dims->horizon; ++k) {
            auto ec = contour_error(track, v.x(k, pxj), v.x(k, pxj + 1),
                                    v.x(k, sj));
            out[k - 1] = ec * ec - w * w;
          }
        });
      } else {
        b.add_constraint_block(2 * N, false, [=](const auto& v, auto* out) {
          int r = 0;
          for (int k = 1; k <= v.dims->horizon; ++k) {
            auto sb = v.x(k, sj);
            auto ec = contour_error(track, v.x(k, pxj), v.x(k, pxj + 1), sb);
            out[r++] = ec - track.width_left(sb);
            out[r++] = -track.width_right(sb) - ec;
          }
        });
      }
    }
    // Shared collision rows on directly extracted positions.
    b.add_constraint_block(N, false, [=](const auto& v, auto* out) {
      for (int k = 1; k <= v.dims->horizon; ++k) {
        auto dx = v.x(k, x_idx) - v.x(k, nxa + x_idx);
        auto dy = v.x(k, x_idx + 1) - v.x(k, nxa + x_idx + 1);
        out[k - 1] = rr2 - dx * dx - dy * dy;
      }
    });
    // Arcspeed bounds C_v, one linear block per agent.
    for (int i = 0; i < 2; ++i) {
      b.add_constraint_block(2 * N, true, [=](const auto& v, auto* out) {
        int r = 0;
        for (int k = 0; k < v.dims->horizon; ++k) {
          out[r++] = v.input(i, k, 2) - v_max;
          out[r++] = -v_max - v.input(i, k, 2);
        }
      });
    }
  });
}

// Single-agent raceline-tracking game on the Frenet model: used as the
// Scenario-2/3 warm start and as the decoupled reference in tests. No
// collision constraint.
inline DynamicGame build_tracking_game(const ParametricTrack& track,
                                       const VehicleParams& p,
                                       const Raceline& raceline,
                                       const Eigen::VectorXd& x0, int N,
                                       bool dynamic_model,
                                       const AgentWeights& aw = {},
                                       double q_v = 10.0, double q_ey = 10.0) {
  p.validate();
  const int nxa = dynamic_model ? 6 : 4;
  const int s_idx = dynamic_model ? 3 : 1;
  const int ey_idx = dynamic_model ? 4 : 2;
  if (x0.size() != nxa) {
    throw ContractViolation("build_tracking_game: x0 has wrong dimension");
  }

  GameDimensions dims;
  dims.num_agents = 1;
  dims.horizon = N;
  dims.state_dim = nxa;
  dims.input_dims = {2};

  Eigen::VectorXd lo(2 * N), up(2 * N);
  for (int k = 0; k < N; ++k) {
    lo[2 * k + 0] = p.a_min;
    up[2 * k + 0] = p.a_max;
    lo[2 * k + 1] = -p.delta_max;
    up[2 * k + 1] = p.delta_max;
  }

  const bool symmetric = detail::uniform_symmetric_width(track);

  return DynamicGame(dims, x0, lo, up, [=](auto& b) {
    b.set_step([=](const auto& x, const auto& u, auto& xn) {
      if (dynamic_model) {
        step_dynamic_frenet(track, p, x.data(), u.data(), xn.data(), p.dt);
      } else {
        step_kinematic_frenet(track, p, x.data(), u.data(), xn.data(), p.dt);
      }
    });
    b.add_cost([=](const auto& v) {
      auto acc = v.x(0, 0) * 0.0;
      for (int k = 0; k < v.dims->horizon; ++k) {
        for (int c = 0; c < 2; ++c) {
          auto uc = v.input(0, k, c);
          acc += aw.R[c] * uc * uc;
          auto du = k == 0 ? uc - aw.u_prev[c] : uc - v.input(0, k - 1, c);
          acc += aw.P[c] * du * du;
        }
      }
      for (int k = 1; k <= v.dims->horizon; ++k) {
        auto s = v.x(k, s_idx);
        auto dv = v.x(k, 0) - raceline.v(s);
        auto de = v.x(k, ey_idx) - raceline.e_y(s);
        acc += q_v * dv * dv + q_ey * de * de;
      }
      return acc;
    });
    b.add_constraint_block(4 * N, true, [=](const auto& v, auto* out) {
      int r = 0;
      for (int k = 0; k < v.dims->horizon; ++k) {
        out[r++] = v.input(0, k, 0) - p.a_max;
        out[r++] = p.a_min - v.input(0, k, 0);
        out[r++] = v.input(0, k, 1) - p.delta_max;
        out[r++] = -p.delta_max - v.input(0, k, 1);
      }
    });
    if (symmetric) {
      const double w = track.segments().front().w_left;
      b.add_constraint_block(N, false, [=](const auto& v, auto* out) {
        for (int k = 1; k <= v.dims->horizon; ++k) {
          auto ey = v.x(k, ey_idx);
          out[k - 1] = ey * ey - w * w;
        }
      });
    } else {
      b.add_constraint_block(2 * N, false, [=](const auto& v, auto* out) {
        int r = 0;
        for (int k = 1; k <= v.dims->horizon; ++k) {
          auto s = v.x(k, s_idx);
          auto ey = v.x(k, ey_idx);
          out[r++] = ey - track.width_left(s);
          out[r++] = -track.width_right(s) - ey;
        }
      });
    }
  });
}

}  // namespace dgsqp
