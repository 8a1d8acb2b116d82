#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "dgsqp/core/errors.hpp"
#include "dgsqp/solver/dgsqp.hpp"

namespace dgsqp::bench {

// Residual value stored on records whose solve never ran (sampling errors):
// large but finite so it round-trips through JSON, and far above any
// convergence threshold so the "converged iff residuals <= tol" invariant
// holds vacuously.
inline constexpr double kNoResidual = 1e300;

// One benchmark solve.  Everything except wall_time_s is a pure function of
// (scenario config, seed), which is what the determinism guarantee covers.
struct StudyRecord {
  std::string scenario;
  int ic_index = 0;
  std::uint64_t seed = 0;
  std::string variant = "full";      // full | ablate-merit | ablate-linesearch
  std::string formulation = "exact"; // exact | approximate
  int horizon = 0;
  double eps0 = 0.0;
  double eta = 0.0;
  std::string status = "sampling_error";
  int iterations = 0;
  double wall_time_s = 0.0;
  double stat_res = kNoResidual;
  double feas_res = kNoResidual;
  double comp_res = kNoResidual;
  std::string solution_file;

  friend bool operator==(const StudyRecord& a, const StudyRecord& b) {
    return a.scenario == b.scenario && a.ic_index == b.ic_index && a.seed == b.seed &&
           a.variant == b.variant && a.formulation == b.formulation && a.horizon == b.horizon &&
           a.eps0 == b.eps0 && a.eta == b.eta && a.status == b.status &&
           a.iterations == b.iterations && a.wall_time_s == b.wall_time_s &&
           a.stat_res == b.stat_res && a.feas_res == b.feas_res && a.comp_res == b.comp_res &&
           a.solution_file == b.solution_file;
  }
};

// Field-wise equality ignoring wall time, for determinism checks.
inline bool equal_excluding_wall(const StudyRecord& a, const StudyRecord& b) {
  StudyRecord a2 = a, b2 = b;
  a2.wall_time_s = b2.wall_time_s = 0.0;
  return a2 == b2;
}

inline bool equal_excluding_wall(const std::vector<StudyRecord>& a,
                                 const std::vector<StudyRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal_excluding_wall(a[i], b[i])) return false;
  return true;
}

inline std::string status_string(solver::SolveStatus s) {
  switch (s) {
    case solver::SolveStatus::Converged: return "converged";
    case solver::SolveStatus::MaxIterations: return "max_iterations";
    case solver::SolveStatus::LineSearchFailure: return "line_search_failure";
    case solver::SolveStatus::QpFailure: return "qp_failure";
  }
  throw ContractViolation("status_string: unknown SolveStatus");
}

// Per-record seed: splitmix64 finalizer over (study seed, IC index) so batch
// results are reproducible independent of execution order.
inline std::uint64_t record_seed(std::uint64_t seed, std::uint64_t ic_index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (ic_index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline int converged_count(const std::vector<StudyRecord>& recs) {
  int n = 0;
  for (const auto& r : recs) n += (r.status == "converged");
  return n;
}

// Shortest representation that round-trips, for stable CSV numbers.
inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline const char* study_csv_header() {
  return "scenario,ic_index,seed,variant,formulation,N,eps0,eta,status,iterations,"
         "wall_time_s,stat_res,feas_res,comp_res,solution_file";
}

inline std::string study_csv_row(const StudyRecord& r) {
  std::string row;
  row += r.scenario;
  row += ',' + std::to_string(r.ic_index);
  row += ',' + std::to_string(r.seed);
  row += ',' + r.variant;
  row += ',' + r.formulation;
  row += ',' + std::to_string(r.horizon);
  row += ',' + fmt_double(r.eps0);
  row += ',' + fmt_double(r.eta);
  row += ',' + r.status;
  row += ',' + std::to_string(r.iterations);
  row += ',' + fmt_double(r.wall_time_s);
  row += ',' + fmt_double(r.stat_res);
  row += ',' + fmt_double(r.feas_res);
  row += ',' + fmt_double(r.comp_res);
  row += ',' + r.solution_file;
  return row;
}

inline void write_study_csv(const std::vector<StudyRecord>& recs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export: cannot open " + path);
  out << study_csv_header() << "\n";
  for (const auto& r : recs) out << study_csv_row(r) << "\n";
}

inline nlohmann::json record_to_json(const StudyRecord& r) {
  return nlohmann::json{{"scenario", r.scenario},
                        {"ic_index", r.ic_index},
                        {"seed", r.seed},
                        {"variant", r.variant},
                        {"formulation", r.formulation},
                        {"N", r.horizon},
                        {"eps0", r.eps0},
                        {"eta", r.eta},
                        {"status", r.status},
                        {"iterations", r.iterations},
                        {"wall_time_s", r.wall_time_s},
                        {"stat_res", r.stat_res},
                        {"feas_res", r.feas_res},
                        {"comp_res", r.comp_res},
                        {"solution_file", r.solution_file}};
}

inline StudyRecord record_from_json(const nlohmann::json& j) {
  StudyRecord r;
  r.scenario = j.at("scenario").get<std::string>();
  r.ic_index = j.at("ic_index").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.variant = j.at("variant").get<std::string>();
  r.formulation = j.at("formulation").get<std::string>();
  r.horizon = j.at("N").get<int>();
  r.eps0 = j.at("eps0").get<double>();
  r.eta = j.at("eta").get<double>();
  r.status = j.at("status").get<std::string>();
  r.iterations = j.at("iterations").get<int>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.stat_res = j.at("stat_res").get<double>();
  r.feas_res = j.at("feas_res").get<double>();
  r.comp_res = j.at("comp_res").get<double>();
  r.solution_file = j.at("solution_file").get<std::string>();
  return r;
}

inline nlohmann::json study_to_json(const std::vector<StudyRecord>& recs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : recs) arr.push_back(record_to_json(r));
  return arr;
}

inline void write_study_json(const std::vector<StudyRecord>& recs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export: cannot open " + path);
  out << study_to_json(recs).dump(2) << "\n";
}

inline std::vector<StudyRecord> study_from_json(const nlohmann::json& arr) {
  std::vector<StudyRecord> recs;
  recs.reserve(arr.size());
  for (const auto& j : arr) recs.push_back(record_from_json(j));
  return recs;
}

inline std::vector<StudyRecord> read_study_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import: cannot open " + path);
  nlohmann::json arr;
  in >> arr;
  return study_from_json(arr);
}

inline std::string percent(int num, int den) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * num / den);
  return buf;
}

// Success rates per (formulation, N), deterministic ordering, no wall times.
inline std::string success_summary(const std::vector<StudyRecord>& recs) {
  if (recs.empty()) return "no records: success rate n/a\n";
  std::map<std::pair<std::string, int>, std::pair<int, int>> groups;  // (conv, total)
  for (const auto& r : recs) {
    auto& g = groups[{r.formulation, r.horizon}];
    g.second += 1;
    g.first += (r.status == "converged");
  }
  std::string out;
  for (const auto& [key, g] : groups) {
    out += "formulation=" + key.first + " N=" + std::to_string(key.second) + ": " +
           std::to_string(g.first) + "/" + std::to_string(g.second) + " converged (" +
           percent(g.first, g.second) + ")\n";
  }
  return out;
}

// Success counts per solver variant on the shared IC batch.
inline std::string ablation_summary(const std::vector<StudyRecord>& recs) {
  if (recs.empty()) return "no records: success rate n/a\n";
  std::string out;
  for (const char* v : {"full", "ablate-merit", "ablate-linesearch"}) {
    int total = 0, conv = 0;
    for (const auto& r : recs) {
      if (r.variant != v) continue;
      total += 1;
      conv += (r.status == "converged");
    }
    if (total == 0) continue;
    out += std::string("variant=") + v + ": " + std::to_string(conv) + "/" +
           std::to_string(total) + " converged (" + percent(conv, total) + ")\n";
  }
  return out;
}

inline int variant_converged(const std::vector<StudyRecord>& recs, const std::string& variant) {
  int n = 0;
  for (const auto& r : recs) n += (r.variant == variant && r.status == "converged");
  return n;
}

// One cell of the regularization-sensitivity grid.
struct GridCell {
  double eps0 = 0.0;
  double eta = 0.0;
  int n = 0;
  int converged = 0;
  double success_rate() const { return n > 0 ? static_cast<double>(converged) / n : 0.0; }
};

// Aggregates records into |eps0s| x |etas| cells (eps0-major order).  The
// record fields hold exact copies of the grid values, so equality matching
// is reliable.
inline std::vector<GridCell> grid_from_records(const std::vector<StudyRecord>& recs,
                                               const std::vector<double>& eps0s,
                                               const std::vector<double>& etas) {
  std::vector<GridCell> cells;
  cells.reserve(eps0s.size() * etas.size());
  for (double e0 : eps0s)
    for (double et : etas) {
      GridCell c;
      c.eps0 = e0;
      c.eta = et;
      for (const auto& r : recs) {
        if (r.eps0 != e0 || r.eta != et) continue;
        c.n += 1;
        c.converged += (r.status == "converged");
      }
      cells.push_back(c);
    }
  return cells;
}

inline const GridCell& grid_cell(const std::vector<GridCell>& cells, double eps0, double eta) {
  for (const auto& c : cells)
    if (c.eps0 == eps0 && c.eta == eta) return c;
  throw ContractViolation("grid_cell: no cell at requested (eps0, eta)");
}

// Plot-ready long format: one row per cell.
inline void write_grid_csv(const std::vector<GridCell>& cells, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export: cannot open " + path);
  out << "eps0,eta,success_rate,n\n";
  for (const auto& c : cells)
    out << fmt_double(c.eps0) << ',' << fmt_double(c.eta) << ',' << fmt_double(c.success_rate())
        << ',' << c.n << "\n";
}

inline nlohmann::json grid_to_json(const std::vector<GridCell>& cells) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cells)
    arr.push_back(nlohmann::json{{"eps0", c.eps0},
                                 {"eta", c.eta},
                                 {"success_rate", c.success_rate()},
                                 {"n", c.n}});
  return arr;
}

inline std::string grid_summary(const std::vector<GridCell>& cells) {
  std::string out;
  for (const auto& c : cells) {
    out += "eps0=" + fmt_double(c.eps0) + " eta=" + fmt_double(c.eta) + ": " +
           std::to_string(c.converged) + "/" + std::to_string(c.n) + " converged";
    if (c.n > 0) out += " (" + percent(c.converged, c.n) + ")";
    out += "\n";
  }
  return out;
}

}  // namespace dgsqp::bench
