#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "dgsqp/core/dual.hpp"
#include "dgsqp/core/errors.hpp"
#include "dgsqp/tracks/track.hpp"

namespace dgsqp {

struct VehicleParams {
  double lf = 0.13;  // m, center of mass to front axle
  double lr = 0.13;  // m, center of mass to rear axle
  double mass = 2.2;     // kg
  double iz = 0.025;     // kg m^2
  double cd = 0.1;       // 1/s, linear drag on v_x
  double bf = 5.0;       // Pacejka front
  double cf = 1.3;
  double df = 10.0;      // N
  double br = 5.0;       // Pacejka rear
  double cr = 1.3;
  double dr = 10.0;      // N
  double dt = 0.1;       // s, discretization step
  double vx_floor = 0.1;     // m/s, dynamic-model validity floor
  double a_min = -2.0;       // m/s^2
  double a_max = 2.0;        // m/s^2
  double delta_max = 0.45;   // rad, symmetric steering box
  double v_max = 2.0;        // m/s, nominal top speed (progress bound scale)
  double radius = 0.15;      // m, collision disc radius

  void validate() const {
    auto pos = [](double v, const char* k) {
      if (!(v > 0.0)) {
        throw ContractViolation(std::string("VehicleParams: ") + k +
                                " must be positive");
      }
    };
    pos(lf, "lf");
    pos(lr, "lr");
    pos(mass, "mass");
    pos(iz, "iz");
    pos(dt, "dt");
    pos(vx_floor, "vx_floor");
    pos(delta_max, "delta_max");
    pos(v_max, "v_max");
    pos(radius, "radius");
    if (!(cd >= 0.0)) throw ContractViolation("VehicleParams: cd must be >= 0");
    if (!(a_min < a_max)) {
      throw ContractViolation("VehicleParams: need a_min < a_max");
    }
  }
};

// Flat key-value file: one "key value" (or "key = value") pair per line,
// '#' starts a comment.
inline VehicleParams load_vehicle_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("vehicle: cannot open " + path);
  VehicleParams p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::replace(line.begin(), line.end(), '=', ' ');
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    double val;
    if (!(ls >> val)) {
      throw std::runtime_error("vehicle: missing value at " + path + ":" +
                               std::to_string(lineno));
    }
    if (key == "lf") p.lf = val;
    else if (key == "lr") p.lr = val;
    else if (key == "mass") p.mass = val;
    else if (key == "iz") p.iz = val;
    else if (key == "cd") p.cd = val;
    else if (key == "bf") p.bf = val;
    else if (key == "cf") p.cf = val;
    else if (key == "df") p.df = val;
    else if (key == "br") p.br = val;
    else if (key == "cr") p.cr = val;
    else if (key == "dr") p.dr = val;
    else if (key == "dt") p.dt = val;
    else if (key == "vx_floor") p.vx_floor = val;
    else if (key == "a_min") p.a_min = val;
    else if (key == "a_max") p.a_max = val;
    else if (key == "delta_max") p.delta_max = val;
    else if (key == "v_max") p.v_max = val;
    else if (key == "radius") p.radius = val;
    else {
      throw std::runtime_error("vehicle: unknown key '" + key + "' at " +
                               path + ":" + std::to_string(lineno));
    }
  }
  p.validate();
  return p;
}

enum class ModelKind {
  KinematicFrenet,
  DynamicFrenet,
  KinematicInertial,
  DynamicInertial,
};

constexpr int state_dim(ModelKind k) {
  return (k == ModelKind::KinematicFrenet || k == ModelKind::KinematicInertial)
             ? 4
             : 6;
}
constexpr int input_dim(ModelKind) { return 2; }
constexpr bool is_frenet(ModelKind k) {
  return k == ModelKind::KinematicFrenet || k == ModelKind::DynamicFrenet;
}
constexpr bool is_dynamic(ModelKind k) {
  return k == ModelKind::DynamicFrenet || k == ModelKind::DynamicInertial;
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "kinematic_frenet") return ModelKind::KinematicFrenet;
  if (s == "dynamic_frenet") return ModelKind::DynamicFrenet;
  if (s == "kinematic_inertial") return ModelKind::KinematicInertial;
  if (s == "dynamic_inertial") return ModelKind::DynamicInertial;
  throw std::runtime_error("vehicle: unknown model '" + s + "'");
}

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::KinematicFrenet: return "kinematic_frenet";
    case ModelKind::DynamicFrenet: return "dynamic_frenet";
    case ModelKind::KinematicInertial: return "kinematic_inertial";
    case ModelKind::DynamicInertial: return "dynamic_inertial";
  }
  return "?";
}

template <class S>
S pacejka_force(double b, double c, double d, const S& alpha) {
  using std::atan;
  using std::sin;
  return d * sin(c + atan(b * alpha));
}

template <class S>
S side_slip(const S& delta, const VehicleParams& p) {
  using std::atan;
  using std::tan;
  return atan(tan(delta) * (p.lf / (p.lf + p.lr)));
}

namespace detail {

template <class S>
void guard_frenet_denom(const S& denom) {
  if (!(ad::value(denom) > 1e-3)) {
    throw ModelError("vehicle: track-frame singularity, 1 - e_y*kappa <= 1e-3");
  }
}

template <class S>
void guard_vx(const S& vx, const VehicleParams& p) {
  if (!(ad::value(vx) > p.vx_floor)) {
    throw ModelError("vehicle: v_x at or below validity floor");
  }
}

// Shared velocity block of the dynamic bicycle: writes d(v_x, v_y, omega)
// into dx[0..2] given x = (v_x, v_y, omega, ...) and u = (a_x, delta).
template <class S>
void dynamic_velocity_rhs(const S* x, const S* u, const VehicleParams& p,
                          S* dx) {
  using std::atan;
  using std::cos;
  using std::sin;
  const S& vx = x[0];
  const S& vy = x[1];
  const S& omega = x[2];
  const S& ax = u[0];
  const S& delta = u[1];
  guard_vx(vx, p);
  S alpha_f = -atan((omega * p.lf + vy) / vx) + delta;
  S alpha_r = atan((omega * p.lr - vy) / vx);
  S fyf = pacejka_force(p.bf, p.cf, p.df, alpha_f);
  S fyr = pacejka_force(p.br, p.cr, p.dr, alpha_r);
  dx[0] = ax - fyf * sin(delta) / p.mass - p.cd * vx + omega * vy;
  dx[1] = (fyr + fyf * cos(delta)) / p.mass - omega * vx;
  dx[2] = (p.lf * fyf * cos(delta) - p.lr * fyr) / p.iz;
}

}  // namespace detail

// Continuous-time right-hand sides. All guards check values so they hold
// on every RK4 substage, not just at step boundaries.

// x = (v, s, e_y, e_psi), u = (a, delta)
template <class S>
void kinematic_frenet_rhs(const ParametricTrack& track, const VehicleParams& p,
                          const S* x, const S* u, S* dx) {
  using std::cos;
  using std::sin;
  const S& v = x[0];
  const S& ey = x[2];
  const S& epsi = x[3];
  S b = side_slip(u[1], p);
  S kap = track.curvature(x[1]);
  S denom = 1.0 - ey * kap;
  detail::guard_frenet_denom(denom);
  S vc = v * cos(epsi + b);
  dx[0] = u[0];
  dx[1] = vc / denom;
  dx[2] = v * sin(epsi + b);
  dx[3] = v * sin(b) / p.lr - kap * vc / denom;
}

// x = (v_x, v_y, omega, s, e_y, e_psi), u = (a_x, delta)
template <class S>
void dynamic_frenet_rhs(const ParametricTrack& track, const VehicleParams& p,
                        const S* x, const S* u, S* dx) {
  using std::cos;
  using std::sin;
  detail::dynamic_velocity_rhs(x, u, p, dx);
  const S& vx = x[0];
  const S& vy = x[1];
  const S& omega = x[2];
  const S& ey = x[4];
  const S& epsi = x[5];
  S kap = track.curvature(x[3]);
  S denom = 1.0 - ey * kap;
  detail::guard_frenet_denom(denom);
  S vproj = vx * cos(epsi) - vy * sin(epsi);
  dx[3] = vproj / denom;
  dx[4] = vx * sin(epsi) + vy * cos(epsi);
  dx[5] = omega - kap * vproj / denom;
}

// x = (v, x, y, psi), u = (a, delta)
template <class S>
void kinematic_inertial_rhs(const VehicleParams& p, const S* x, const S* u,
                            S* dx) {
  using std::cos;
  using std::sin;
  const S& v = x[0];
  const S& psi = x[3];
  S b = side_slip(u[1], p);
  dx[0] = u[0];
  dx[1] = v * cos(b + psi);
  dx[2] = v * sin(b + psi);
  dx[3] = v * sin(b) / p.lr;
}

// x = (v_x, v_y, omega, x, y, psi), u = (a_x, delta)
template <class S>
void dynamic_inertial_rhs(const VehicleParams& p, const S* x, const S* u,
                          S* dx) {
  using std::cos;
  using std::sin;
  detail::dynamic_velocity_rhs(x, u, p, dx);
  const S& vx = x[0];
  const S& vy = x[1];
  const S& psi = x[5];
  dx[3] = vx * cos(psi) - vy * sin(psi);
  dx[4] = vx * sin(psi) + vy * cos(psi);
  dx[5] = x[2];
}

namespace detail {

template <class S, int NX, class Rhs>
void rk4_step(const Rhs& f, const S* x, const S* u, double dt, S* out) {
  std::array<S, NX> k1, k2, k3, k4, tmp;
  f(x, u, k1.data());
  for (int i = 0; i < NX; ++i) tmp[i] = x[i] + (0.5 * dt) * k1[i];
  f(tmp.data(), u, k2.data());
  for (int i = 0; i < NX; ++i) tmp[i] = x[i] + (0.5 * dt) * k2[i];
  f(tmp.data(), u, k3.data());
  for (int i = 0; i < NX; ++i) tmp[i] = x[i] + dt * k3[i];
  f(tmp.data(), u, k4.data());
  for (int i = 0; i < NX; ++i) {
    out[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

}  // namespace detail

// One RK4 step of length dt (default: params.dt). Raw-pointer forms write
// out[0..nx); they are safe for in-place use (out may alias x).

template <class S>
void step_kinematic_frenet(const ParametricTrack& track,
                           const VehicleParams& p, const S* x, const S* u,
                           S* out, double dt) {
  auto f = [&](const S* xs, const S* us, S* dxs) {
    kinematic_frenet_rhs(track, p, xs, us, dxs);
  };
  detail::rk4_step<S, 4>(f, x, u, dt, out);
}

template <class S>
void step_dynamic_frenet(const ParametricTrack& track, const VehicleParams& p,
                         const S* x, const S* u, S* out, double dt) {
  auto f = [&](const S* xs, const S* us, S* dxs) {
    dynamic_frenet_rhs(track, p, xs, us, dxs);
  };
  detail::rk4_step<S, 6>(f, x, u, dt, out);
}

template <class S>
void step_kinematic_inertial(const VehicleParams& p, const S* x, const S* u,
                             S* out, double dt) {
  auto f = [&](const S* xs, const S* us, S* dxs) {
    kinematic_inertial_rhs(p, xs, us, dxs);
  };
  detail::rk4_step<S, 4>(f, x, u, dt, out);
}

template <class S>
void step_dynamic_inertial(const VehicleParams& p, const S* x, const S* u,
                           S* out, double dt) {
  auto f = [&](const S* xs, const S* us, S* dxs) {
    dynamic_inertial_rhs(p, xs, us, dxs);
  };
  detail::rk4_step<S, 6>(f, x, u, dt, out);
}

// Eigen conveniences over the raw-pointer cores.

template <class S>
Eigen::Vector<S, Eigen::Dynamic> step_model(
    ModelKind kind, const ParametricTrack& track, const VehicleParams& p,
    const Eigen::Vector<S, Eigen::Dynamic>& x,
    const Eigen::Vector<S, Eigen::Dynamic>& u) {
  if (x.size() != state_dim(kind) || u.size() != 2) {
    throw ContractViolation("step_model: state/input dimension mismatch");
  }
  Eigen::Vector<S, Eigen::Dynamic> out(x.size());
  switch (kind) {
    case ModelKind::KinematicFrenet:
      step_kinematic_frenet(track, p, x.data(), u.data(), out.data(), p.dt);
      break;
    case ModelKind::DynamicFrenet:
      step_dynamic_frenet(track, p, x.data(), u.data(), out.data(), p.dt);
      break;
    case ModelKind::KinematicInertial:
      step_kinematic_inertial(p, x.data(), u.data(), out.data(), p.dt);
      break;
    case ModelKind::DynamicInertial:
      step_dynamic_inertial(p, x.data(), u.data(), out.data(), p.dt);
      break;
  }
  return out;
}

}  // namespace dgsqp
