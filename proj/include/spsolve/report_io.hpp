#pragma once

#include "spsolve/json_out.hpp"
#include "spsolve/solvers.hpp"

#include <iosfwd>

namespace spsolve {

// CSV trace: iteration, objective, constraint_norm, kkt_stationarity,
// rel_change.
void write_trace_csv(std::ostream& os, const RunReport& report);

// Report body shared by the CLI subcommands; solution vector included on
// request.
JsonValue run_report_json(const RunReport& report, bool include_solution);

}  // namespace spsolve
