#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dgsqp/racing/racing.hpp"
#include "dgsqp/racing/sampling.hpp"
#include "dgsqp/racing/warm_start.hpp"
#include "dgsqp/solver/config.hpp"

namespace dgsqp {

// Fully resolved racing scenario: track, vehicles, weights, sampling spec and
// solver settings, ready to instantiate games from sampled initial conditions.
struct ScenarioConfig {
  std::string name;
  bool dynamic_model = false;
  bool approximate = false;
  std::string warm_start = "pid";  // "pid" | "tracking"
  int horizon = 10;
  ParametricTrack track;
  VehicleParams vehicle1;
  VehicleParams vehicle2;
  RacingWeights weights;
  SamplingSpec sampling;
  solver::SolverConfig solver_cfg;
  Raceline raceline;  // loaded, or centerline fallback
};

namespace detail {

// Relative paths resolve against the config file's directory first, then the
// DGSQP_DATA_DIR environment variable, then the working directory.
inline std::string resolve_path(const std::string& p, const std::string& base_dir) {
  namespace fs = std::filesystem;
  fs::path pp(p);
  if (pp.is_absolute()) {
    if (fs::exists(pp)) return pp.string();
    throw std::runtime_error("scenario: file not found: " + p);
  }
  if (!base_dir.empty()) {
    fs::path c = fs::path(base_dir) / pp;
    if (fs::exists(c)) return c.string();
  }
  if (const char* env = std::getenv("DGSQP_DATA_DIR")) {
    fs::path c = fs::path(env) / pp;
    if (fs::exists(c)) return c.string();
  }
  if (fs::exists(pp)) return pp.string();
  throw std::runtime_error("scenario: cannot resolve path '" + p + "'");
}

inline void require_keys(const nlohmann::json& j,
                         std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) { known = true; break; }
    }
    if (!known) {
      throw std::runtime_error("scenario: unknown key '" + item.key() + "' in " + where);
    }
  }
}

inline void parse_agent_weights(const nlohmann::json& j, AgentWeights& aw) {
  if (j.contains("R")) {
    aw.R = Eigen::Vector2d(j["R"].at(0).get<double>(), j["R"].at(1).get<double>());
  }
  if (j.contains("P")) {
    aw.P = Eigen::Vector2d(j["P"].at(0).get<double>(), j["P"].at(1).get<double>());
  }
  if (j.contains("q1")) aw.q1 = j["q1"].get<double>();
  if (j.contains("q2")) aw.q2 = j["q2"].get<double>();
  if (j.contains("u_prev")) {
    aw.u_prev = Eigen::Vector2d(j["u_prev"].at(0).get<double>(),
                                j["u_prev"].at(1).get<double>());
  }
}

}  // namespace detail

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open " + path);
  nlohmann::json j;
  in >> j;

  detail::require_keys(j,
                       {"name", "model", "formulation", "track", "vehicle1",
                        "vehicle2", "horizon", "weights", "warm_start",
                        "raceline", "raceline_speed", "sampling", "solver"},
                       "scenario");

  const std::string base_dir =
      std::filesystem::path(path).parent_path().string();

  ScenarioConfig cfg;
  cfg.name = j.value("name", std::string("scenario"));

  const std::string model = j.at("model").get<std::string>();
  if (model == "kinematic") cfg.dynamic_model = false;
  else if (model == "dynamic") cfg.dynamic_model = true;
  else throw std::runtime_error("scenario: unknown model '" + model + "'");

  const std::string form = j.at("formulation").get<std::string>();
  if (form == "exact") cfg.approximate = false;
  else if (form == "approximate") cfg.approximate = true;
  else throw std::runtime_error("scenario: unknown formulation '" + form + "'");

  cfg.track = ParametricTrack::from_json_file(
      detail::resolve_path(j.at("track").get<std::string>(), base_dir));
  cfg.vehicle1 = load_vehicle_params(
      detail::resolve_path(j.at("vehicle1").get<std::string>(), base_dir));
  cfg.vehicle2 = load_vehicle_params(
      detail::resolve_path(j.at("vehicle2").get<std::string>(), base_dir));

  cfg.horizon = j.value("horizon", 10);
  if (cfg.horizon < 1) throw std::runtime_error("scenario: horizon must be >= 1");

  if (j.contains("weights")) {
    const auto& w = j["weights"];
    detail::require_keys(w,
                         {"R", "P", "q1", "q2", "u_prev", "q_l", "v_max",
                          "v_max_scale", "competition", "agents"},
                         "weights");
    AgentWeights shared;
    detail::parse_agent_weights(w, shared);
    cfg.weights.agents = {shared, shared};
    if (w.contains("agents")) {
      const auto& arr = w["agents"];
      if (!arr.is_array() || arr.size() != 2) {
        throw std::runtime_error("scenario: weights.agents must have two entries");
      }
      for (int i = 0; i < 2; ++i) {
        detail::require_keys(arr.at(i), {"R", "P", "q1", "q2", "u_prev"},
                             "weights.agents entry");
        detail::parse_agent_weights(arr.at(i), cfg.weights.agents[i]);
      }
    }
    if (w.contains("q_l")) cfg.weights.q_l = w["q_l"].get<double>();
    if (w.contains("competition")) {
      cfg.weights.competition =
          competition_form_from_string(w["competition"].get<std::string>());
    }
    if (w.contains("v_max") && w.contains("v_max_scale")) {
      throw std::runtime_error("scenario: give v_max or v_max_scale, not both");
    }
    if (w.contains("v_max")) {
      cfg.weights.v_max = w["v_max"].get<double>();
    } else {
      double scale = w.value("v_max_scale", 1.5);
      cfg.weights.v_max = scale * std::max(cfg.vehicle1.v_max, cfg.vehicle2.v_max);
    }
  } else {
    cfg.weights.v_max = 1.5 * std::max(cfg.vehicle1.v_max, cfg.vehicle2.v_max);
  }
  cfg.weights.validate();

  cfg.warm_start = j.value("warm_start", std::string("pid"));
  if (cfg.warm_start != "pid" && cfg.warm_start != "tracking") {
    throw std::runtime_error("scenario: unknown warm_start '" + cfg.warm_start + "'");
  }

  if (j.contains("sampling")) {
    const auto& s = j["sampling"];
    detail::require_keys(s,
                         {"s_min", "s_max", "gap", "v_min", "v_max",
                          "speed_ratio", "ey_frac", "max_draws"},
                         "sampling");
    cfg.sampling.s_min = s.value("s_min", cfg.sampling.s_min);
    cfg.sampling.s_max = s.value("s_max", cfg.sampling.s_max);
    cfg.sampling.gap = s.value("gap", cfg.sampling.gap);
    cfg.sampling.v_min = s.value("v_min", cfg.sampling.v_min);
    cfg.sampling.v_max = s.value("v_max", cfg.sampling.v_max);
    cfg.sampling.speed_ratio = s.value("speed_ratio", cfg.sampling.speed_ratio);
    cfg.sampling.ey_frac = s.value("ey_frac", cfg.sampling.ey_frac);
    cfg.sampling.max_draws = s.value("max_draws", cfg.sampling.max_draws);
  }
  cfg.sampling.validate();

  if (j.contains("solver")) {
    for (const auto& item : j["solver"].items()) {
      std::string val;
      if (item.value().is_string()) val = item.value().get<std::string>();
      else if (item.value().is_boolean()) val = item.value().get<bool>() ? "1" : "0";
      else val = item.value().dump();
      solver::apply_config_line(cfg.solver_cfg, item.key(), val);
    }
    cfg.solver_cfg.validate();
  }

  if (j.contains("raceline")) {
    cfg.raceline = Raceline::from_csv(
        detail::resolve_path(j["raceline"].get<std::string>(), base_dir),
        cfg.track);
  } else {
    double v_ref = j.value("raceline_speed",
                           0.5 * (cfg.sampling.v_min + cfg.sampling.v_max));
    cfg.raceline = Raceline::centerline(cfg.track, v_ref);
  }

  return cfg;
}

inline Eigen::VectorXd scenario_initial_state(const ScenarioConfig& cfg,
                                              const RacingIc& ic) {
  return cfg.approximate ? ic.approx_state(cfg.track, cfg.dynamic_model)
                         : ic.exact_state(cfg.dynamic_model);
}

inline DynamicGame make_scenario_game(const ScenarioConfig& cfg,
                                      const RacingIc& ic) {
  Eigen::VectorXd x0 = scenario_initial_state(cfg, ic);
  if (cfg.approximate) {
    return build_approx_game(cfg.track, cfg.vehicle1, cfg.vehicle2, cfg.weights,
                             x0, cfg.horizon, cfg.dynamic_model);
  }
  return build_exact_game(cfg.track, cfg.vehicle1, cfg.vehicle2, cfg.weights,
                          x0, cfg.horizon, cfg.dynamic_model);
}

inline WarmStart make_scenario_warm_start(const ScenarioConfig& cfg,
                                          const RacingIc& ic) {
  if (cfg.warm_start == "tracking") {
    return warm_start_tracking(cfg.track, cfg.raceline, cfg.vehicle1,
                               cfg.vehicle2, ic, cfg.horizon, cfg.dynamic_model,
                               cfg.approximate, cfg.weights.v_max,
                               cfg.solver_cfg);
  }
  return warm_start_pid(cfg.track, cfg.vehicle1, cfg.vehicle2, ic, cfg.horizon,
                        cfg.dynamic_model, cfg.approximate, cfg.weights.v_max);
}

}  // namespace dgsqp
