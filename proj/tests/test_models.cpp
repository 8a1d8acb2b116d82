#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "dgsqp/core/autodiff.hpp"
#include "dgsqp/vehicles/vehicle.hpp"

using dgsqp::ModelError;
using dgsqp::ParametricTrack;
using dgsqp::VehicleParams;
using nlohmann::json;

namespace {

ParametricTrack arc_track(double radius = 2.0, double sweep_deg = 90.0) {
  json j = {{"name", "arc"},
            {"closed", false},
            {"width_left", 0.5},
            {"width_right", 0.5},
            {"segments", json::array({{{"type", "arc"},
                                       {"radius", radius},
                                       {"sweep_deg", sweep_deg}}})}};
  return ParametricTrack::from_json(j);
}

ParametricTrack straight_track(double len = 20.0) {
  json j = {{"name", "straight"},
            {"closed", false},
            {"width_left", 0.5},
            {"width_right", 0.5},
            {"segments", json::array({{{"type", "straight"}, {"length", len}}})}};
  return ParametricTrack::from_json(j);
}

// Generic one-step driver over the four models with explicit dt.
template <int NX>
using Arr = std::array<double, NX>;

template <int NX, class Step>
Arr<NX> substeps(const Step& step, Arr<NX> x, const Arr<2>& u, double dt,
                 int n) {
  for (int i = 0; i < n; ++i) {
    step(x.data(), u.data(), x.data(), dt / n);
  }
  return x;
}

// Measures the one-step convergence order at dt and checks a single step
// against a 10x-substep reference at oracle_dt. The oracle step is separate
// because the dynamic models' literal tire law D sin(C + atan(B alpha))
// applies ~0.96 D of lateral force at zero slip, which makes their one-step
// truncation error at dt = 0.1 far larger than the kinematic models'.
template <int NX, class Step>
void check_rk4_order(const Step& step, const Arr<NX>& x0, const Arr<2>& u,
                     double dt, double oracle_dt, double oracle_tol) {
  Arr<NX> ref = substeps<NX>(step, x0, u, dt, 64);
  Arr<NX> one = substeps<NX>(step, x0, u, dt, 1);
  Arr<NX> half = substeps<NX>(step, x0, u, dt, 2);
  double e1 = 0.0, e2 = 0.0;
  for (int i = 0; i < NX; ++i) {
    e1 = std::max(e1, std::abs(one[i] - ref[i]));
    e2 = std::max(e2, std::abs(half[i] - ref[i]));
  }
  INFO("e(dt)=" << e1 << " e(dt/2)=" << e2);
  REQUIRE(e1 > 1e-14);  // above roundoff so the exponent is meaningful
  double order = std::log2(e1 / e2);
  CHECK(order >= 3.7);

  Arr<NX> o1 = substeps<NX>(step, x0, u, oracle_dt, 1);
  Arr<NX> o10 = substeps<NX>(step, x0, u, oracle_dt, 10);
  double e10 = 0.0;
  for (int i = 0; i < NX; ++i) e10 = std::max(e10, std::abs(o1[i] - o10[i]));
  CHECK(e10 <= oracle_tol);
}

}  // namespace

TEST_CASE("zero velocity is a fixed point of the kinematic models", "[models]") {
  VehicleParams p;
  ParametricTrack t = arc_track();
  Arr<4> xf{0.0, 1.0, 0.15, 0.2};
  Arr<2> u{0.0, 0.35};  // zero accel, arbitrary steering
  Arr<4> out;
  dgsqp::step_kinematic_frenet(t, p, xf.data(), u.data(), out.data(), p.dt);
  for (int i = 0; i < 4; ++i) CHECK(out[i] == Catch::Approx(xf[i]).margin(1e-15));

  Arr<4> xi{0.0, 0.4, -0.3, 1.1};
  dgsqp::step_kinematic_inertial(p, xi.data(), u.data(), out.data(), p.dt);
  for (int i = 0; i < 4; ++i) CHECK(out[i] == Catch::Approx(xi[i]).margin(1e-15));
}

TEST_CASE("straight-line longitudinal motion decouples exactly", "[models]") {
  VehicleParams p;
  ParametricTrack t = straight_track();
  double v0 = 1.3, a = 0.7, s0 = 2.0, ey0 = 0.12;
  Arr<4> x{v0, s0, ey0, 0.0};
  Arr<2> u{a, 0.0};
  Arr<4> out;
  dgsqp::step_kinematic_frenet(t, p, x.data(), u.data(), out.data(), p.dt);
  // v(t) is linear and s(t) quadratic in t, so RK4 integrates both exactly.
  CHECK(out[0] == Catch::Approx(v0 + a * p.dt).margin(1e-12));
  CHECK(out[1] ==
        Catch::Approx(s0 + v0 * p.dt + 0.5 * a * p.dt * p.dt).margin(1e-12));
  CHECK(out[2] == Catch::Approx(ey0).margin(1e-14));
  CHECK(out[3] == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("pacejka lateral force at zero slip", "[models]") {
  VehicleParams p;
  CHECK(dgsqp::pacejka_force(p.bf, p.cf, p.df, 0.0) ==
        Catch::Approx(p.df * std::sin(p.cf)));
  CHECK(dgsqp::pacejka_force(5.0, 1.3, 10.0, 0.1) ==
        Catch::Approx(10.0 * std::sin(1.3 + std::atan(0.5))));
}

TEST_CASE("dynamic model: v_x follows pure drag dynamics when delta = 0",
          "[models]") {
  VehicleParams p;
  double v0 = 1.5, ax = 0.8;
  Arr<6> x{v0, 0.0, 0.0, 0.0, 0.0, 0.0};
  Arr<2> u{ax, 0.0};
  Arr<6> out;
  dgsqp::step_dynamic_inertial(p, x.data(), u.data(), out.data(), p.dt);
  // With delta = 0 and identical axles, alpha_f = alpha_r at every substate,
  // so the yaw moment cancels, omega stays 0, and
  // v_x' = a_x - c_d v_x decouples. Closed form of the linear ODE:
  double vx_exact =
      ax / p.cd + (v0 - ax / p.cd) * std::exp(-p.cd * p.dt);
  CHECK(out[0] == Catch::Approx(vx_exact).margin(1e-8));
  CHECK(out[2] == Catch::Approx(0.0).margin(1e-12));
  // The literal tire law produces D sin(C) per axle at zero slip, so v_y
  // drifts even in nominally straight running.
  CHECK(std::abs(out[1]) > 1e-3);
}

TEST_CASE("one RK4 step has measured order >= 3.7 on all four models",
          "[models]") {
  VehicleParams p;
  ParametricTrack arc = arc_track();
  double dt = p.dt;

  SECTION("kinematic frenet") {
    auto step = [&](const double* x, const double* u, double* out, double h) {
      dgsqp::step_kinematic_frenet(arc, p, x, u, out, h);
    };
    check_rk4_order<4>(step, {1.2, 1.5, 0.1, 0.05}, {0.5, 0.1}, dt, dt, 1e-7);
  }
  SECTION("dynamic frenet") {
    auto step = [&](const double* x, const double* u, double* out, double h) {
      dgsqp::step_dynamic_frenet(arc, p, x, u, out, h);
    };
    check_rk4_order<6>(step, {1.2, 0.02, 0.1, 1.5, 0.1, 0.05}, {0.4, 0.05}, dt,
                       0.002, 1e-7);
  }
  SECTION("kinematic inertial") {
    auto step = [&](const double* x, const double* u, double* out, double h) {
      dgsqp::step_kinematic_inertial(p, x, u, out, h);
    };
    check_rk4_order<4>(step, {1.2, 0.3, -0.2, 0.4}, {0.5, 0.2}, dt, dt, 1e-7);
  }
  SECTION("dynamic inertial") {
    auto step = [&](const double* x, const double* u, double* out, double h) {
      dgsqp::step_dynamic_inertial(p, x, u, out, h);
    };
    check_rk4_order<6>(step, {1.2, 0.02, 0.1, 0.3, -0.2, 0.4}, {0.4, 0.05}, dt,
                       0.002, 1e-7);
  }
}

TEST_CASE("constant steering traces a circle of radius l_r / sin(beta)",
          "[models]") {
  VehicleParams p;
  // Pick the turn rate so one period is an exact multiple of the substep.
  double T = 7.0, dt = 0.01, v = 1.0;
  double psi_dot = 2.0 * M_PI / T;
  double beta = std::asin(psi_dot * p.lr / v);
  double delta = std::atan(std::tan(beta) * (p.lf + p.lr) / p.lf);
  double radius = p.lr / std::sin(beta);

  Arr<4> x{v, 0.0, 0.0, 0.0};
  Arr<2> u{0.0, delta};
  // Center of the circular path sits at distance R normal to the velocity
  // direction psi + beta.
  double cx = -radius * std::sin(beta);
  double cy = radius * std::cos(beta);
  int steps = static_cast<int>(std::round(T / dt));
  for (int k = 0; k < steps; ++k) {
    dgsqp::step_kinematic_inertial(p, x.data(), u.data(), x.data(), dt);
    double r = std::hypot(x[1] - cx, x[2] - cy);
    REQUIRE(std::abs(r - radius) <= 1e-6);
  }
  CHECK(std::abs(x[1]) <= 1e-4);
  CHECK(std::abs(x[2]) <= 1e-4);
  CHECK(x[3] == Catch::Approx(2.0 * M_PI).margin(1e-6));
}

TEST_CASE("frenet and inertial variants agree through the pose transform",
          "[models]") {
  VehicleParams p;
  ParametricTrack t = arc_track(2.0, 90.0);  // kappa = 0.5 everywhere

  SECTION("kinematic") {
    double s0 = 1.5, ey0 = 0.2, epsi0 = 0.1, v0 = 1.2;
    Arr<4> xf{v0, s0, ey0, epsi0};
    double px, py;
    t.frenet_to_inertial(s0, ey0, px, py);
    Arr<4> xi{v0, px, py, t.heading(s0) + epsi0};
    Arr<2> u{0.4, 0.15};
    Arr<4> xf1, xi1;
    dgsqp::step_kinematic_frenet(t, p, xf.data(), u.data(), xf1.data(), p.dt);
    dgsqp::step_kinematic_inertial(p, xi.data(), u.data(), xi1.data(), p.dt);
    dgsqp::FrenetPose pose = t.frenet_pose(xi1[1], xi1[2], xi1[3]);
    CHECK(std::abs(xi1[0] - xf1[0]) <= 1e-12);
    CHECK(std::abs(pose.s - xf1[1]) <= 1e-6);
    CHECK(std::abs(pose.e_y - xf1[2]) <= 1e-6);
    CHECK(std::abs(pose.e_psi - xf1[3]) <= 1e-6);
  }
  SECTION("dynamic") {
    double s0 = 1.5, ey0 = 0.1, epsi0 = 0.05;
    Arr<6> xf{1.2, 0.05, 0.3, s0, ey0, epsi0};
    double px, py;
    t.frenet_to_inertial(s0, ey0, px, py);
    Arr<6> xi{1.2, 0.05, 0.3, px, py, t.heading(s0) + epsi0};
    Arr<2> u{0.4, 0.1};
    Arr<6> xf1, xi1;
    // Finer step for the stiff literal tire law; the representations agree
    // in the continuous limit, and each discretization adds O(dt^5).
    const double dt = 0.02;
    dgsqp::step_dynamic_frenet(t, p, xf.data(), u.data(), xf1.data(), dt);
    dgsqp::step_dynamic_inertial(p, xi.data(), u.data(), xi1.data(), dt);
    // The velocity block is pose-independent, so it matches to roundoff.
    for (int i = 0; i < 3; ++i) REQUIRE(std::abs(xi1[i] - xf1[i]) <= 1e-12);
    dgsqp::FrenetPose pose = t.frenet_pose(xi1[3], xi1[4], xi1[5]);
    CHECK(std::abs(pose.s - xf1[3]) <= 1e-6);
    CHECK(std::abs(pose.e_y - xf1[4]) <= 1e-6);
    CHECK(std::abs(pose.e_psi - xf1[5]) <= 1e-6);
  }
}

TEST_CASE("model validity guards raise ModelError", "[models]") {
  VehicleParams p;
  ParametricTrack t = arc_track(2.0, 90.0);
  Arr<2> u{0.0, 0.0};
  Arr<4> out4;
  Arr<6> out6;

  // 1 - e_y kappa hits zero at e_y = 2 on a radius-2 arc.
  Arr<4> sing{1.0, 1.0, 2.0, 0.0};
  CHECK_THROWS_AS(dgsqp::step_kinematic_frenet(t, p, sing.data(), u.data(),
                                               out4.data(), p.dt),
                  ModelError);
  Arr<4> fine{1.0, 1.0, 0.4, 0.0};
  CHECK_NOTHROW(dgsqp::step_kinematic_frenet(t, p, fine.data(), u.data(),
                                             out4.data(), p.dt));

  Arr<6> slow{0.05, 0.0, 0.0, 1.0, 0.0, 0.0};
  CHECK_THROWS_AS(dgsqp::step_dynamic_frenet(t, p, slow.data(), u.data(),
                                             out6.data(), p.dt),
                  ModelError);
  CHECK_THROWS_AS(dgsqp::step_dynamic_inertial(p, slow.data(), u.data(),
                                               out6.data(), p.dt),
                  ModelError);
}

TEST_CASE("templated steps differentiate consistently with finite differences",
          "[models]") {
  using dgsqp::ad::D1;
  VehicleParams p;
  ParametricTrack t = arc_track(2.0, 90.0);

  Arr<4> x0{1.1, 0.8, 0.1, -0.05};
  Arr<2> u0{0.6, 0.12};

  // Seed lanes: 0,1 for the inputs, 2 for e_y.
  std::array<D1, 4> x;
  std::array<D1, 2> u;
  for (int i = 0; i < 4; ++i) x[i] = D1(x0[i]);
  for (int j = 0; j < 2; ++j) {
    u[j] = D1(u0[j]);
    u[j].d[j] = 1.0;
  }
  x[2].d[2] = 1.0;
  std::array<D1, 4> out;
  dgsqp::step_kinematic_frenet(t, p, x.data(), u.data(), out.data(), p.dt);

  const double h = 1e-6;
  auto fd_lane = [&](int lane) {
    Arr<4> xp = x0, xm = x0;
    Arr<2> up = u0, um = u0;
    if (lane < 2) {
      up[lane] += h;
      um[lane] -= h;
    } else {
      xp[2] += h;
      xm[2] -= h;
    }
    Arr<4> op, om;
    dgsqp::step_kinematic_frenet(t, p, xp.data(), up.data(), op.data(), p.dt);
    dgsqp::step_kinematic_frenet(t, p, xm.data(), um.data(), om.data(), p.dt);
    Arr<4> g;
    for (int i = 0; i < 4; ++i) g[i] = (op[i] - om[i]) / (2.0 * h);
    return g;
  };
  for (int lane = 0; lane < 3; ++lane) {
    Arr<4> g = fd_lane(lane);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(std::abs(out[i].d[lane] - g[i]) <=
              1e-6 * std::max(1.0, std::abs(g[i])));
    }
  }
}

TEST_CASE("vehicle parameter files load and validate", "[models]") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "dgsqp_vehicle_test.txt";
  {
    std::ofstream out(path);
    out << "# test vehicle\n";
    out << "lf 0.15\n";
    out << "lr = 0.11\n";
    out << "mass 2.5   # trailing comment\n";
    out << "df 12.0\n";
    out << "a_min -3.0\n";
    out << "a_max 3.0\n";
  }
  VehicleParams p = dgsqp::load_vehicle_params(path.string());
  CHECK(p.lf == Catch::Approx(0.15));
  CHECK(p.lr == Catch::Approx(0.11));
  CHECK(p.mass == Catch::Approx(2.5));
  CHECK(p.df == Catch::Approx(12.0));
  CHECK(p.a_min == Catch::Approx(-3.0));
  // Untouched keys keep their defaults.
  CHECK(p.iz == Catch::Approx(0.025));

  {
    std::ofstream out(path);
    out << "wheelbase 0.3\n";
  }
  CHECK_THROWS_AS(dgsqp::load_vehicle_params(path.string()), std::runtime_error);

  {
    std::ofstream out(path);
    out << "mass -1\n";
  }
  CHECK_THROWS_AS(dgsqp::load_vehicle_params(path.string()),
                  dgsqp::ContractViolation);
  fs::remove(path);
}

TEST_CASE("step_model checks dimensions", "[models]") {
  VehicleParams p;
  ParametricTrack t = straight_track();
  Eigen::VectorXd x(4), u(2);
  x << 1.0, 0.5, 0.0, 0.0;
  u << 0.1, 0.0;
  CHECK_NOTHROW(dgsqp::step_model(dgsqp::ModelKind::KinematicFrenet, t, p, x, u));
  CHECK_THROWS_AS(dgsqp::step_model(dgsqp::ModelKind::DynamicFrenet, t, p, x, u),
                  dgsqp::ContractViolation);
}
