#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dgsqp/tracks/track.hpp"
#include "dgsqp/vehicles/vehicle.hpp"

namespace dgsqp {

// Joint two-vehicle initial condition in Frenet terms (e_psi = 0, and zero
// lateral velocity / yaw rate for the dynamic models).
struct RacingIc {
  std::array<double, 2> v{1.0, 1.0};
  std::array<double, 2> s{0.0, 0.0};
  std::array<double, 2> e_y{0.0, 0.0};

  Eigen::VectorXd exact_state(bool dynamic_model) const {
    const int nxa = dynamic_model ? 6 : 4;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * nxa);
    for (int i = 0; i < 2; ++i) {
      if (dynamic_model) {
        x0[i * nxa + 0] = v[i];
        x0[i * nxa + 3] = s[i];
        x0[i * nxa + 4] = e_y[i];
      } else {
        x0[i * nxa + 0] = v[i];
        x0[i * nxa + 1] = s[i];
        x0[i * nxa + 2] = e_y[i];
      }
    }
    return x0;
  }

  Eigen::VectorXd approx_state(const ParametricTrack& track,
                               bool dynamic_model) const {
    const int nxb = dynamic_model ? 6 : 4;
    const int nxa = nxb + 1;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * nxa);
    for (int i = 0; i < 2; ++i) {
      double px, py;
      track.frenet_to_inertial(s[i], e_y[i], px, py);
      double psi = track.heading(s[i]);
      if (dynamic_model) {
        x0[i * nxa + 0] = v[i];
        x0[i * nxa + 3] = px;
        x0[i * nxa + 4] = py;
        x0[i * nxa + 5] = psi;
      } else {
        x0[i * nxa + 0] = v[i];
        x0[i * nxa + 1] = px;
        x0[i * nxa + 2] = py;
        x0[i * nxa + 3] = psi;
      }
      x0[i * nxa + nxb] = s[i];  // s_bar0 = s(p_0)
    }
    return x0;
  }
};

struct SamplingSpec {
  double s_min = 0.0;
  double s_max = 1.0;         // progress range for agent 1
  double gap = 0.5;           // |s1 - s2| bound, meters (1.2 car lengths)
  double v_min = 0.5;
  double v_max = 1.5;         // speed band for both agents
  double speed_ratio = 0.75;  // ratio band [speed_ratio, 1/speed_ratio]
  double ey_frac = 0.6;       // usable fraction of the lateral bounds
  int max_draws = 10000;

  void validate() const {
    if (!(s_max >= s_min)) throw ContractViolation("SamplingSpec: s range empty");
    if (!(gap >= 0.0)) throw ContractViolation("SamplingSpec: gap must be >= 0");
    if (!(v_min > 0.0 && v_max >= v_min)) {
      throw ContractViolation("SamplingSpec: bad speed band");
    }
    if (!(speed_ratio > 0.0 && speed_ratio <= 1.0)) {
      throw ContractViolation("SamplingSpec: speed_ratio in (0, 1]");
    }
    if (!(ey_frac > 0.0 && ey_frac < 1.0)) {
      throw ContractViolation("SamplingSpec: ey_frac in (0, 1)");
    }
  }
};

// Rejection-samples collision-free joint initial conditions: progress gap at
// most spec.gap along s, speed ratio within [speed_ratio, 1/speed_ratio],
// both vehicles strictly inside the track and not in contact. Deterministic
// under seed.
inline std::vector<RacingIc> sample_initial_conditions(
    const ParametricTrack& track, const VehicleParams& p1,
    const VehicleParams& p2, const SamplingSpec& spec, int count,
    std::uint64_t seed) {
  spec.validate();
  std::vector<RacingIc> out;
  if (count <= 0) return out;
  out.reserve(static_cast<size_t>(count));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double rr = p1.radius + p2.radius;
  const std::array<double, 2> radius{p1.radius, p2.radius};

  int draws = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++draws > spec.max_draws) {
      throw std::runtime_error("sampling: rejection cap exceeded");
    }
    RacingIc ic;
    ic.s[0] = spec.s_min + (spec.s_max - spec.s_min) * u01(rng);
    ic.s[1] = ic.s[0] + spec.gap * (2.0 * u01(rng) - 1.0);
    if (track.closed()) {
      ic.s[1] = track.wrap_progress(ic.s[1]);
    } else if (ic.s[1] < 0.0 || ic.s[1] > track.total_length()) {
      continue;
    }
    bool lateral_ok = true;
    for (int i = 0; i < 2; ++i) {
      double wl = spec.ey_frac * (track.width_left(ic.s[i]) - radius[i]);
      double wr = spec.ey_frac * (track.width_right(ic.s[i]) - radius[i]);
      if (!(wl > 0.0 && wr > 0.0)) {
        lateral_ok = false;
        break;
      }
      ic.e_y[i] = -wr + (wl + wr) * u01(rng);
    }
    if (!lateral_ok) continue;
    ic.v[0] = spec.v_min + (spec.v_max - spec.v_min) * u01(rng);
    double ratio_hi = 1.0 / spec.speed_ratio;
    double ratio = spec.speed_ratio + (ratio_hi - spec.speed_ratio) * u01(rng);
    ic.v[1] = ratio * ic.v[0];
    if (ic.v[1] < spec.v_min || ic.v[1] > spec.v_max) continue;

    double pa[2], pb[2];
    track.frenet_to_inertial(ic.s[0], ic.e_y[0], pa[0], pa[1]);
    track.frenet_to_inertial(ic.s[1], ic.e_y[1], pb[0], pb[1]);
    if (std::hypot(pa[0] - pb[0], pa[1] - pb[1]) <= 1.05 * rr) continue;

    out.push_back(ic);
  }
  return out;
}

}  // namespace dgsqp
