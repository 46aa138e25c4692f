#include "spsolve/report_io.hpp"

#include <ostream>

namespace spsolve {

void write_trace_csv(std::ostream& os, const RunReport& report) {
  os << "iteration,objective,constraint_norm,kkt_stationarity,rel_change\n";
  for (std::size_t i = 0; i < report.trace_iterations.size(); ++i) {
    os << report.trace_iterations[i] << ","
       << format_double(report.objective_trace[i]) << ","
       << format_double(report.constraint_norm_trace[i]) << ","
       << format_double(report.kkt_stationarity_trace[i]) << ","
       << format_double(report.rel_change_trace[i]) << "\n";
  }
}

JsonValue run_report_json(const RunReport& report, bool include_solution) {
  JsonValue j = JsonValue::object();
  j.set("converged", report.converged);
  j.set("iterations", report.iterations_run);
  j.set("objective", report.final_objective);
  JsonValue kkt = JsonValue::object();
  kkt.set("stationarity", report.kkt.stationarity);
  kkt.set("dual_feasibility", report.kkt.dual_feasibility);
  kkt.set("primal_feasibility", report.kkt.primal_feasibility);
  j.set("kkt", std::move(kkt));
  JsonValue steps = JsonValue::object();
  steps.set("tau1", report.steps.tau1);
  steps.set("tau2", report.steps.tau2);
  steps.set("tau3", report.steps.tau3);
  steps.set("alpha", report.steps.alpha);
  steps.set("gram_sq_norm", report.steps.gram_sq_norm);
  steps.set("penalty_sq_norm", report.steps.penalty_sq_norm);
  j.set("steps", std::move(steps));
  if (include_solution) {
    j.set("x", JsonValue::array(report.final_state.x));
  }
  return j;
}

}  // namespace spsolve
