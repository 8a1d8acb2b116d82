#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dgsqp/core/errors.hpp"

namespace dgsqp::solver {

// One row per SQP iteration.  The fields after step_kind are internal
// diagnostics and are not part of the exported CSV schema.
struct IterationRecord {
  int iter = 0;
  double merit = 0.0;
  double stat_res = 0.0;
  double feas_res = 0.0;
  double comp_res = 0.0;
  double alpha = 0.0;
  double eps = 0.0;
  std::string step_kind;
  double mu = 0.0;
  double viol_l1 = 0.0;
  double dir_deriv = 0.0;
};

inline std::string format_trace_row(const IterationRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%s", r.iter, r.merit,
                r.stat_res, r.feas_res, r.comp_res, r.alpha, r.eps, r.step_kind.c_str());
  return buf;
}

inline void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw ContractViolation("write_trace_csv: cannot open " + path);
  out << "iter,merit,stat_res,feas_res,comp_res,alpha,eps,step_kind\n";
  for (const auto& r : trace) out << format_trace_row(r) << "\n";
}

}  // namespace dgsqp::solver
