// Command-line harness: single solves with iteration traces, Monte-Carlo
// study batches (success rates, ablations, regularization grid, exact-vs-
// approximate MSE), IC sampling, and derivative validation.
#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "dgsqp/bench/record.hpp"
#include "dgsqp/bench/studies.hpp"
#include "dgsqp/bench/validate.hpp"
#include "dgsqp/racing/scenario.hpp"

namespace {

using namespace dgsqp;

struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  int count = -1;
  std::vector<int> horizons;
  std::string out;
  std::string format = "csv";
  int parallel = 1;
  std::string formulation;  // "", "exact", "approximate"
  std::string model;        // "", "kinematic", "dynamic"
  std::string records;      // reggrid: optional per-record dump
};

void add_common(CLI::App* cmd, CommonFlags& f, int default_count) {
  cmd->add_option("--config", f.config, "scenario config JSON")->required();
  cmd->add_option("--seed", f.seed, "study seed");
  f.count = default_count;
  cmd->add_option("--count", f.count, "number of initial conditions");
  cmd->add_option("--horizon", f.horizons, "horizon list N1,N2,...")->delimiter(',');
  cmd->add_option("--out", f.out, "output file path");
  cmd->add_option("--format", f.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--parallel", f.parallel, "worker threads across ICs")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--formulation", f.formulation, "override formulation")
      ->check(CLI::IsMember({"exact", "approximate"}));
  cmd->add_option("--model", f.model, "override vehicle model")
      ->check(CLI::IsMember({"kinematic", "dynamic"}));
}

// Anything wrong with the config file itself is a usage error (exit 1),
// distinct from runtime failures while a study executes (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ScenarioConfig load_config(const CommonFlags& f) {
  try {
    ScenarioConfig cfg = load_scenario(f.config);
    if (f.formulation == "exact") cfg.approximate = false;
    if (f.formulation == "approximate") cfg.approximate = true;
    if (f.model == "kinematic") cfg.dynamic_model = false;
    if (f.model == "dynamic") cfg.dynamic_model = true;
    return cfg;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

bench::StudyOptions study_options(const CommonFlags& f, const ScenarioConfig& cfg) {
  bench::StudyOptions opt;
  opt.count = f.count;
  opt.horizons = f.horizons.empty() ? std::vector<int>{cfg.horizon} : f.horizons;
  opt.seed = f.seed;
  opt.parallel = f.parallel;
  return opt;
}

void write_records(const std::vector<bench::StudyRecord>& recs, const std::string& path,
                   const std::string& format) {
  if (path.empty()) return;
  if (format == "json")
    bench::write_study_json(recs, path);
  else
    bench::write_study_csv(recs, path);
  std::printf("wrote %zu records to %s\n", recs.size(), path.c_str());
}

int cmd_solve(const CommonFlags& f, int ic_index) {
  ScenarioConfig cfg = load_config(f);
  const int N = f.horizons.empty() ? cfg.horizon : f.horizons.front();
  cfg.horizon = N;
  auto ics = sample_initial_conditions(cfg.track, cfg.vehicle1, cfg.vehicle2, cfg.sampling,
                                       ic_index + 1, f.seed);
  const RacingIc& ic = ics.at(static_cast<std::size_t>(ic_index));
  std::printf("ic %d: v=(%.3f, %.3f) s=(%.3f, %.3f) e_y=(%.3f, %.3f)\n", ic_index, ic.v[0],
              ic.v[1], ic.s[0], ic.s[1], ic.e_y[0], ic.e_y[1]);

  DynamicGame game = make_scenario_game(cfg, ic);
  WarmStart ws = make_scenario_warm_start(cfg, ic);
  if (!ws.ok) {
    std::printf("warm start failed; aborting solve\n");
    return 2;
  }
  std::printf("iter,merit,stat_res,feas_res,comp_res,alpha,eps,step_kind\n");
  solver::SolveResult res =
      solver::solve(game, ws.u, cfg.solver_cfg, [](const solver::IterationRecord& r) {
        std::printf("%s\n", solver::format_trace_row(r).c_str());
      });
  std::printf("status=%s iterations=%d stat=%.3e feas=%.3e comp=%.3e wall=%.2fs\n",
              bench::status_string(res.status).c_str(), res.iterations, res.stat_res,
              res.feas_res, res.comp_res, res.wall_time_s);
  if (!f.out.empty()) {
    solver::write_trace_csv(f.out, res.trace);
    std::printf("wrote trace to %s\n", f.out.c_str());
  }
  return 0;
}

int cmd_study_success(const CommonFlags& f) {
  ScenarioConfig cfg = load_config(f);
  auto recs = bench::run_success_study(cfg, study_options(f, cfg));
  std::fputs(bench::success_summary(recs).c_str(), stdout);
  std::printf("converged records: %d/%zu\n", bench::converged_count(recs), recs.size());
  write_records(recs, f.out, f.format);
  return 0;
}

int cmd_study_ablation(const CommonFlags& f) {
  ScenarioConfig cfg = load_config(f);
  auto recs = bench::run_ablation(cfg, study_options(f, cfg));
  std::fputs(bench::ablation_summary(recs).c_str(), stdout);
  write_records(recs, f.out, f.format);
  return 0;
}

int cmd_study_reggrid(const CommonFlags& f, const std::vector<double>& eps0s,
                      const std::vector<double>& etas) {
  ScenarioConfig cfg = load_config(f);
  auto recs = bench::run_regularization_grid(cfg, eps0s, etas, study_options(f, cfg));
  auto cells = bench::grid_from_records(recs, eps0s, etas);
  std::fputs(bench::grid_summary(cells).c_str(), stdout);
  if (!f.out.empty()) {
    if (f.format == "json") {
      std::ofstream o(f.out);
      if (!o) throw std::runtime_error("export: cannot open " + f.out);
      o << bench::grid_to_json(cells).dump(2) << "\n";
    } else {
      bench::write_grid_csv(cells, f.out);
    }
    std::printf("wrote %zu grid cells to %s\n", cells.size(), f.out.c_str());
  }
  write_records(recs, f.records, f.format);
  return 0;
}

int cmd_study_mse(const CommonFlags& f) {
  ScenarioConfig cfg = load_config(f);
  std::vector<bench::StudyRecord> recs;
  bench::MseReport rep = bench::run_mse_comparison(cfg, study_options(f, cfg), &recs);
  std::fputs(rep.summary().c_str(), stdout);
  if (!f.out.empty()) {
    if (f.format == "json") {
      std::ofstream o(f.out);
      if (!o) throw std::runtime_error("export: cannot open " + f.out);
      o << bench::mse_to_json(rep).dump(2) << "\n";
    } else {
      bench::write_mse_csv(rep, f.out);
    }
    std::printf("wrote MSE report to %s\n", f.out.c_str());
  }
  write_records(recs, f.records, f.format);
  return 0;
}

int cmd_sample_ics(const CommonFlags& f) {
  ScenarioConfig cfg = load_config(f);
  auto ics = sample_initial_conditions(cfg.track, cfg.vehicle1, cfg.vehicle2, cfg.sampling,
                                       f.count, f.seed);
  std::string text = "ic_index,v1,s1,ey1,v2,s2,ey2\n";
  for (std::size_t i = 0; i < ics.size(); ++i) {
    const auto& ic = ics[i];
    text += std::to_string(i) + ',' + bench::fmt_double(ic.v[0]) + ',' +
            bench::fmt_double(ic.s[0]) + ',' + bench::fmt_double(ic.e_y[0]) + ',' +
            bench::fmt_double(ic.v[1]) + ',' + bench::fmt_double(ic.s[1]) + ',' +
            bench::fmt_double(ic.e_y[1]) + '\n';
  }
  if (f.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream o(f.out);
    if (!o) throw std::runtime_error("export: cannot open " + f.out);
    o << text;
    std::printf("wrote %zu ICs to %s\n", ics.size(), f.out.c_str());
  }
  return 0;
}

int cmd_validate(const CommonFlags& f) {
  ScenarioConfig cfg = load_config(f);
  const int iterates = f.count;
  bench::ValidationReport rep = bench::run_derivative_validation(
      cfg.track, cfg.vehicle1, cfg.vehicle2, cfg.weights, iterates, f.seed);
  std::fputs(rep.summary().c_str(), stdout);
  const bool ok = rep.ok(1e-4);
  std::printf("worst rel err %.3e: %s\n", rep.worst(), ok ? "OK" : "FAIL");
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DG-SQP racing game solver: solves and Monte-Carlo studies"};
  app.require_subcommand(1);

  CommonFlags solve_f, success_f, ablation_f, reggrid_f, mse_f, sample_f, validate_f;
  int ic_index = 0;
  std::vector<double> eps0s{0.0, 0.1, 1.0, 10.0, 1000.0};
  std::vector<double> etas{0.5, 0.65, 0.8, 0.95, 1.0};

  CLI::App* solve = app.add_subcommand("solve", "solve one sampled IC and print the trace");
  add_common(solve, solve_f, 1);
  solve->add_option("--ic-index", ic_index, "index into the sampled IC stream");

  CLI::App* study = app.add_subcommand("study", "Monte-Carlo study batches");
  study->require_subcommand(1);
  CLI::App* success = study->add_subcommand("success", "success rates per horizon");
  add_common(success, success_f, 50);
  CLI::App* ablation = study->add_subcommand("ablation", "merit / line-search ablations");
  add_common(ablation, ablation_f, 20);
  CLI::App* reggrid = study->add_subcommand("reggrid", "regularization sensitivity grid");
  add_common(reggrid, reggrid_f, 20);
  reggrid->add_option("--eps0", eps0s, "eps0 grid values")->delimiter(',');
  reggrid->add_option("--eta", etas, "eta grid values")->delimiter(',');
  reggrid->add_option("--records", reggrid_f.records, "also dump per-record file");
  CLI::App* mse = study->add_subcommand("mse", "exact-vs-approximate MSE comparison");
  add_common(mse, mse_f, 20);
  mse->add_option("--records", mse_f.records, "also dump per-record file");

  CLI::App* sample = app.add_subcommand("sample-ics", "print sampled initial conditions");
  add_common(sample, sample_f, 10);

  CLI::App* validate =
      app.add_subcommand("validate-derivatives", "analytic derivatives vs finite differences");
  add_common(validate, validate_f, 100);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_f, ic_index);
    if (success->parsed()) return cmd_study_success(success_f);
    if (ablation->parsed()) return cmd_study_ablation(ablation_f);
    if (reggrid->parsed()) return cmd_study_reggrid(reggrid_f, eps0s, etas);
    if (mse->parsed()) return cmd_study_mse(mse_f);
    if (sample->parsed()) return cmd_sample_ics(sample_f);
    if (validate->parsed()) return cmd_validate(validate_f);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const dgsqp::ContractViolation& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
