#pragma once

#include <istream>
#include <sstream>
#include <string>

#include "dgsqp/core/errors.hpp"
#include "dgsqp/core/game.hpp"

namespace dgsqp::solver {

// Which gamma the merit function uses: the stacked Lagrangian gradient norm
// (Eq. 13) or the plain sum of player costs (ablation, Eq. 33).
enum class MeritVariant { Lagrangian, CostSum };

struct SolverConfig {
  double eps0 = 10.0;          // initial Hessian regularization
  double eta = 0.95;           // regularization decay on m-steps
  double zeta = 1e-2;          // sufficient decrease factor, in (0, 0.5)
  double rho = 0.5;            // penalty margin in the mu rule, in (0, 1)
  double conv_tol_stat = 1e-4;
  double conv_tol_feas = 1e-4;
  double conv_tol_comp = 1e-4;
  int max_iter = 300;
  int max_d_steps = 5;         // consecutive watchdog d-steps before an m-step
  double backtrack = 0.5;      // line search step shrink factor
  int max_trials = 20;         // line search trial budget
  double mu_min = 1e-4;
  HessianMode hessian_mode = HessianMode::Exact;
  MeritVariant merit_variant = MeritVariant::Lagrangian;
  bool monotone = false;       // ablation: enforce Eq. 18 at every iteration

  void validate() const {
    if (eps0 < 0.0) throw ContractViolation("SolverConfig: eps0 < 0");
    if (eta <= 0.0 || eta > 1.0) throw ContractViolation("SolverConfig: eta outside (0, 1]");
    if (zeta <= 0.0 || zeta >= 0.5) throw ContractViolation("SolverConfig: zeta outside (0, 0.5)");
    if (rho <= 0.0 || rho >= 1.0) throw ContractViolation("SolverConfig: rho outside (0, 1)");
    if (conv_tol_stat <= 0.0 || conv_tol_feas <= 0.0 || conv_tol_comp <= 0.0)
      throw ContractViolation("SolverConfig: conv_tol must be positive");
    if (max_iter < 1) throw ContractViolation("SolverConfig: max_iter < 1");
    if (max_d_steps < 0) throw ContractViolation("SolverConfig: max_d_steps < 0");
    if (backtrack <= 0.0 || backtrack >= 1.0)
      throw ContractViolation("SolverConfig: backtrack outside (0, 1)");
    if (max_trials < 1) throw ContractViolation("SolverConfig: max_trials < 1");
    if (mu_min < 0.0) throw ContractViolation("SolverConfig: mu_min < 0");
  }
};

// Plain "key = value" format with '#' comments.  Unknown keys are errors so
// config typos never pass silently.
inline void apply_config_line(SolverConfig& cfg, const std::string& key, const std::string& val) {
  auto num = [&] {
    try {
      std::size_t pos = 0;
      double v = std::stod(val, &pos);
      while (pos < val.size() && std::isspace(static_cast<unsigned char>(val[pos]))) ++pos;
      if (pos != val.size()) throw std::invalid_argument(val);
      return v;
    } catch (const std::exception&) {
      throw ContractViolation("solver config: bad numeric value '" + val + "' for " + key);
    }
  };
  if (key == "eps0") cfg.eps0 = num();
  else if (key == "eta") cfg.eta = num();
  else if (key == "zeta") cfg.zeta = num();
  else if (key == "rho") cfg.rho = num();
  else if (key == "conv_tol") cfg.conv_tol_stat = cfg.conv_tol_feas = cfg.conv_tol_comp = num();
  else if (key == "conv_tol.stat") cfg.conv_tol_stat = num();
  else if (key == "conv_tol.feas") cfg.conv_tol_feas = num();
  else if (key == "conv_tol.comp") cfg.conv_tol_comp = num();
  else if (key == "max_iter") cfg.max_iter = static_cast<int>(num());
  else if (key == "watchdog.max_d_steps") cfg.max_d_steps = static_cast<int>(num());
  else if (key == "linesearch.backtrack") cfg.backtrack = num();
  else if (key == "linesearch.max_trials") cfg.max_trials = static_cast<int>(num());
  else if (key == "linesearch.monotone") cfg.monotone = num() != 0.0;
  else if (key == "merit.mu_min") cfg.mu_min = num();
  else if (key == "merit.variant") {
    if (val == "lagrangian") cfg.merit_variant = MeritVariant::Lagrangian;
    else if (val == "cost_sum") cfg.merit_variant = MeritVariant::CostSum;
    else throw ContractViolation("solver config: unknown merit.variant '" + val + "'");
  } else if (key == "hessian.mode") {
    if (val == "exact") cfg.hessian_mode = HessianMode::Exact;
    else if (val == "gauss_newton") cfg.hessian_mode = HessianMode::GaussNewton;
    else throw ContractViolation("solver config: unknown hessian.mode '" + val + "'");
  } else {
    throw ContractViolation("solver config: unknown key '" + key + "'");
  }
}

inline SolverConfig parse_solver_config(std::istream& in, SolverConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ContractViolation("solver config: line " + std::to_string(lineno) + " has no '='");
    apply_config_line(base, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  base.validate();
  return base;
}

inline SolverConfig parse_solver_config_string(const std::string& text, SolverConfig base = {}) {
  std::istringstream in(text);
  return parse_solver_config(in, base);
}

}  // namespace dgsqp::solver
