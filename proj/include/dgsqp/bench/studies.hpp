#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "dgsqp/bench/record.hpp"
#include "dgsqp/racing/scenario.hpp"

namespace dgsqp::bench {

struct StudyOptions {
  int count = 50;
  std::vector<int> horizons{15};
  std::uint64_t seed = 0;
  int parallel = 1;
  std::string out_dir;  // when non-empty, per-solve solution files are written
  bool log = false;     // progress lines on stderr

  void validate() const {
    if (count < 0) throw ContractViolation("StudyOptions: count < 0");
    if (horizons.empty()) throw ContractViolation("StudyOptions: empty horizon list");
    for (int n : horizons)
      if (n < 1) throw ContractViolation("StudyOptions: horizon < 1");
    if (parallel < 1) throw ContractViolation("StudyOptions: parallel < 1");
  }
};

// Batch-parallel loop over independent jobs.  Each job writes only its own
// output slot; aggregation stays single-threaded in the caller.
template <class F>
void parallel_for(int n, int threads, F&& f) {
  threads = std::min(std::max(threads, 1), std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
    });
  for (auto& th : pool) th.join();
}

namespace detail {

inline solver::SolverConfig variant_config(solver::SolverConfig scfg, const std::string& variant) {
  if (variant == "ablate-merit") {
    scfg.merit_variant = solver::MeritVariant::CostSum;
  } else if (variant == "ablate-linesearch") {
    scfg.monotone = true;
  } else if (variant != "full") {
    throw ContractViolation("study: unknown solver variant '" + variant + "'");
  }
  return scfg;
}

inline bool log_enabled(const StudyOptions& opt) {
  if (opt.log) return true;
  const char* env = std::getenv("DGSQP_LOG");
  return env != nullptr && std::string(env) != "" && std::string(env) != "quiet";
}

}  // namespace detail

struct CaseResult {
  StudyRecord record;
  Eigen::VectorXd u;       // converged joint input sequence (empty otherwise)
  bool solved = false;
};

// One (IC, horizon, variant) solve.  Never throws for per-case failures: the
// record carries the failure status so batches keep going.
inline CaseResult run_case(const ScenarioConfig& base, const RacingIc& ic, int ic_index,
                           std::uint64_t study_seed, int N, const solver::SolverConfig& scfg,
                           const std::string& variant, const std::string& out_dir) {
  CaseResult out;
  StudyRecord& rec = out.record;
  rec.scenario = base.name;
  rec.ic_index = ic_index;
  rec.seed = record_seed(study_seed, static_cast<std::uint64_t>(ic_index));
  rec.variant = variant;
  rec.formulation = base.approximate ? "approximate" : "exact";
  rec.horizon = N;
  rec.eps0 = scfg.eps0;
  rec.eta = scfg.eta;

  ScenarioConfig cfg = base;
  cfg.horizon = N;
  cfg.solver_cfg = scfg;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    DynamicGame game = make_scenario_game(cfg, ic);
    WarmStart ws = make_scenario_warm_start(cfg, ic);
    if (!ws.ok) {
      rec.status = "sampling_error";
    } else {
      solver::SolveResult res = solver::solve(game, ws.u, scfg);
      rec.status = status_string(res.status);
      rec.iterations = res.iterations;
      rec.stat_res = res.stat_res;
      rec.feas_res = res.feas_res;
      rec.comp_res = res.comp_res;
      out.solved = res.status == solver::SolveStatus::Converged;
      out.u = std::move(res.u);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::string name = rec.scenario + "_" + rec.formulation + "_" + variant + "_N" +
                           std::to_string(N) + "_ic" + std::to_string(ic_index) + ".json";
        nlohmann::json sol{{"status", rec.status},
                           {"u", std::vector<double>(out.u.data(), out.u.data() + out.u.size())}};
        std::ofstream f(std::filesystem::path(out_dir) / name);
        f << sol.dump(2) << "\n";
        rec.solution_file = name;
      }
    }
  } catch (const ModelError&) {
    rec.status = "sampling_error";  // warm start / game construction left the model's domain
  } catch (const ContractViolation&) {
    rec.status = "sampling_error";  // IC rejected by game construction
  } catch (const std::exception&) {
    rec.status = "qp_failure";
  }
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// Monte-Carlo success study: one record per (IC, N), formulation and solver
// settings taken from the scenario config.
inline std::vector<StudyRecord> run_success_study(const ScenarioConfig& cfg,
                                                  const StudyOptions& opt,
                                                  std::vector<Eigen::VectorXd>* solutions = nullptr) {
  opt.validate();
  const std::vector<RacingIc> ics = sample_initial_conditions(
      cfg.track, cfg.vehicle1, cfg.vehicle2, cfg.sampling, opt.count, opt.seed);
  const int nh = static_cast<int>(opt.horizons.size());
  const int jobs = static_cast<int>(ics.size()) * nh;
  std::vector<StudyRecord> recs(static_cast<std::size_t>(jobs));
  if (solutions) solutions->assign(static_cast<std::size_t>(jobs), Eigen::VectorXd());
  const bool log = detail::log_enabled(opt);
  parallel_for(jobs, opt.parallel, [&](int j) {
    const int ic = j / nh, hi = j % nh;
    CaseResult cr = run_case(cfg, ics[static_cast<std::size_t>(ic)], ic, opt.seed,
                             opt.horizons[static_cast<std::size_t>(hi)], cfg.solver_cfg, "full",
                             opt.out_dir);
    if (log)
      std::fprintf(stderr, "[study] ic=%d N=%d %s (%d iters, %.2fs)\n", ic, cr.record.horizon,
                   cr.record.status.c_str(), cr.record.iterations, cr.record.wall_time_s);
    if (solutions) (*solutions)[static_cast<std::size_t>(j)] = std::move(cr.u);
    recs[static_cast<std::size_t>(j)] = std::move(cr.record);
  });
  return recs;
}

// Table-II style ablation: full merit/watchdog machinery vs the cost-sum
// merit vs strictly monotone line search, all on the identical IC batch.
inline std::vector<StudyRecord> run_ablation(const ScenarioConfig& cfg, const StudyOptions& opt) {
  opt.validate();
  static const char* kVariants[] = {"full", "ablate-merit", "ablate-linesearch"};
  const std::vector<RacingIc> ics = sample_initial_conditions(
      cfg.track, cfg.vehicle1, cfg.vehicle2, cfg.sampling, opt.count, opt.seed);
  const int nh = static_cast<int>(opt.horizons.size());
  const int per_variant = static_cast<int>(ics.size()) * nh;
  const int jobs = 3 * per_variant;
  std::vector<StudyRecord> recs(static_cast<std::size_t>(jobs));
  const bool log = detail::log_enabled(opt);
  parallel_for(jobs, opt.parallel, [&](int j) {
    const int vi = j / per_variant;
    const int r = j % per_variant;
    const int ic = r / nh, hi = r % nh;
    const std::string variant = kVariants[vi];
    CaseResult cr = run_case(cfg, ics[static_cast<std::size_t>(ic)], ic, opt.seed,
                             opt.horizons[static_cast<std::size_t>(hi)],
                             detail::variant_config(cfg.solver_cfg, variant), variant, opt.out_dir);
    if (log)
      std::fprintf(stderr, "[ablation] %s ic=%d %s\n", variant.c_str(), ic,
                   cr.record.status.c_str());
    recs[static_cast<std::size_t>(j)] = std::move(cr.record);
  });
  return recs;
}

// Success-rate matrix over (eps0, eta) on a shared IC batch.
inline std::vector<StudyRecord> run_regularization_grid(const ScenarioConfig& cfg,
                                                        const std::vector<double>& eps0s,
                                                        const std::vector<double>& etas,
                                                        const StudyOptions& opt) {
  opt.validate();
  if (eps0s.empty() || etas.empty())
    throw ContractViolation("regularization grid: empty eps0 or eta list");
  const std::vector<RacingIc> ics = sample_initial_conditions(
      cfg.track, cfg.vehicle1, cfg.vehicle2, cfg.sampling, opt.count, opt.seed);
  const int nh = static_cast<int>(opt.horizons.size());
  const int per_cell = static_cast<int>(ics.size()) * nh;
  const int cells = static_cast<int>(eps0s.size() * etas.size());
  const int jobs = cells * per_cell;
  std::vector<StudyRecord> recs(static_cast<std::size_t>(jobs));
  const bool log = detail::log_enabled(opt);
  parallel_for(jobs, opt.parallel, [&](int j) {
    const int cell = j / per_cell;
    const int r = j % per_cell;
    const int ic = r / nh, hi = r % nh;
    const double e0 = eps0s[static_cast<std::size_t>(cell) / etas.size()];
    const double et = etas[static_cast<std::size_t>(cell) % etas.size()];
    solver::SolverConfig scfg = cfg.solver_cfg;
    scfg.eps0 = e0;
    scfg.eta = et;
    CaseResult cr = run_case(cfg, ics[static_cast<std::size_t>(ic)], ic, opt.seed,
                             opt.horizons[static_cast<std::size_t>(hi)], scfg, "full", opt.out_dir);
    if (log)
      std::fprintf(stderr, "[reggrid] eps0=%g eta=%g ic=%d %s\n", e0, et, ic,
                   cr.record.status.c_str());
    recs[static_cast<std::size_t>(j)] = std::move(cr.record);
  });
  return recs;
}

// Normalized squared input distance between an approximate-formulation
// solution (m_hat inputs per step, first two are accel and steering) and an
// exact-formulation solution (m per step), weighted by D = diag(u_u).
inline double normalized_mse(const Eigen::VectorXd& u_hat, int m_hat, const Eigen::VectorXd& u,
                             int m, int N, const Eigen::VectorXd& input_upper) {
  const int M = static_cast<int>(input_upper.size()) / 2;
  if (u_hat.size() != static_cast<Eigen::Index>(M) * m_hat * N ||
      u.size() != static_cast<Eigen::Index>(M) * m * N)
    throw ContractViolation("normalized_mse: size mismatch");
  double acc = 0.0;
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < N; ++k)
      for (int c = 0; c < 2; ++c) {
        const double dv = u_hat[i * m_hat * N + k * m_hat + c] - u[i * m * N + k * m + c];
        acc += dv * dv / input_upper[2 * i + c];
      }
  return acc / N;
}

struct MseEntry {
  int ic_index = 0;
  double mse = 0.0;
  bool order_agreement = false;
};

struct MseReport {
  std::vector<MseEntry> entries;  // jointly converged ICs only
  int attempted = 0;
  double min = 0.0, median = 0.0, mean = 0.0;
  double order_agreement_rate = 0.0;

  // Statistics are always recomputed from the per-IC list.
  void finalize() {
    if (entries.empty()) {
      min = median = mean = order_agreement_rate = 0.0;
      return;
    }
    std::vector<double> v;
    v.reserve(entries.size());
    double acc = 0.0;
    int agree = 0;
    for (const auto& e : entries) {
      v.push_back(e.mse);
      acc += e.mse;
      agree += e.order_agreement;
    }
    std::sort(v.begin(), v.end());
    min = v.front();
    mean = acc / static_cast<double>(v.size());
    const std::size_t h = v.size() / 2;
    median = (v.size() % 2 == 1) ? v[h] : 0.5 * (v[h - 1] + v[h]);
    order_agreement_rate = static_cast<double>(agree) / static_cast<double>(entries.size());
  }

  std::string summary() const {
    if (entries.empty())
      return "warning: no jointly converged ICs; empty MSE report (attempted " +
             std::to_string(attempted) + ")\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "jointly converged %zu/%d: MSE min %.4e median %.4e mean %.4e, "
                  "finish-order agreement %.1f%%\n",
                  entries.size(), attempted, min, median, mean, 100.0 * order_agreement_rate);
    return buf;
  }
};

inline void write_mse_csv(const MseReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export: cannot open " + path);
  out << "ic_index,mse,order_agreement\n";
  for (const auto& e : rep.entries)
    out << e.ic_index << ',' << fmt_double(e.mse) << ',' << (e.order_agreement ? 1 : 0) << "\n";
}

inline nlohmann::json mse_to_json(const MseReport& rep) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : rep.entries)
    entries.push_back(nlohmann::json{
        {"ic_index", e.ic_index}, {"mse", e.mse}, {"order_agreement", e.order_agreement}});
  return nlohmann::json{{"entries", entries},
                        {"attempted", rep.attempted},
                        {"min", rep.min},
                        {"median", rep.median},
                        {"mean", rep.mean},
                        {"order_agreement_rate", rep.order_agreement_rate}};
}

namespace detail {

// Signed terminal progress lead of agent 0 over agent 1 under joint input u.
inline double progress_lead(const ScenarioConfig& cfg, const RacingIc& ic, int N,
                            const Eigen::VectorXd& u) {
  ScenarioConfig c = cfg;
  c.horizon = N;
  DynamicGame g = make_scenario_game(c, ic);
  const Eigen::MatrixXd X = g.rollout(u);
  const int nxb = cfg.dynamic_model ? 6 : 4;
  const int nxa = cfg.approximate ? nxb + 1 : nxb;
  const int s_idx = cfg.approximate ? nxb : (cfg.dynamic_model ? 3 : 1);
  return X(N, 0 * nxa + s_idx) - X(N, 1 * nxa + s_idx);
}

}  // namespace detail

// Exact-vs-approximate comparison on a shared IC batch: per-IC normalized MSE
// over the (accel, steering) inputs plus finish-order agreement, restricted
// to ICs where both formulations converge.
inline MseReport run_mse_comparison(const ScenarioConfig& cfg, const StudyOptions& opt,
                                    std::vector<StudyRecord>* records_out = nullptr) {
  opt.validate();
  ScenarioConfig exact_cfg = cfg;
  exact_cfg.approximate = false;
  ScenarioConfig approx_cfg = cfg;
  approx_cfg.approximate = true;
  const std::vector<RacingIc> ics = sample_initial_conditions(
      cfg.track, cfg.vehicle1, cfg.vehicle2, cfg.sampling, opt.count, opt.seed);
  const int N = opt.horizons.front();
  const int n_ic = static_cast<int>(ics.size());
  const bool log = detail::log_enabled(opt);

  Eigen::VectorXd input_upper(4);
  input_upper << cfg.vehicle1.a_max, cfg.vehicle1.delta_max, cfg.vehicle2.a_max,
      cfg.vehicle2.delta_max;

  std::vector<CaseResult> exact_res(static_cast<std::size_t>(n_ic));
  std::vector<CaseResult> approx_res(static_cast<std::size_t>(n_ic));
  parallel_for(2 * n_ic, opt.parallel, [&](int j) {
    const int ic = j / 2;
    const auto& c = (j % 2 == 0) ? exact_cfg : approx_cfg;
    CaseResult cr =
        run_case(c, ics[static_cast<std::size_t>(ic)], ic, opt.seed, N, cfg.solver_cfg, "full",
                 opt.out_dir);
    if (log)
      std::fprintf(stderr, "[mse] ic=%d %s %s\n", ic, cr.record.formulation.c_str(),
                   cr.record.status.c_str());
    ((j % 2 == 0) ? exact_res : approx_res)[static_cast<std::size_t>(ic)] = std::move(cr);
  });

  MseReport rep;
  rep.attempted = n_ic;
  for (int ic = 0; ic < n_ic; ++ic) {
    const auto& ex = exact_res[static_cast<std::size_t>(ic)];
    const auto& ap = approx_res[static_cast<std::size_t>(ic)];
    if (records_out) {
      records_out->push_back(ex.record);
      records_out->push_back(ap.record);
    }
    if (!ex.solved || !ap.solved) continue;
    MseEntry e;
    e.ic_index = ic;
    e.mse = normalized_mse(ap.u, 3, ex.u, 2, N, input_upper);
    const double lead_exact =
        detail::progress_lead(exact_cfg, ics[static_cast<std::size_t>(ic)], N, ex.u);
    const double lead_approx =
        detail::progress_lead(approx_cfg, ics[static_cast<std::size_t>(ic)], N, ap.u);
    e.order_agreement = (lead_exact > 0.0) == (lead_approx > 0.0);
    rep.entries.push_back(e);
  }
  rep.finalize();
  return rep;
}

}  // namespace dgsqp::bench
