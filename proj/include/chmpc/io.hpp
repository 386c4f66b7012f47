#pragma once

#include <string>

#include "chmpc/sim.hpp"

namespace chmpc {

/// trajectory.csv: k, x components, u components, l, V_N, barrier values.
/// The final state's input/cost columns are nan (no input was applied).
void write_trajectory_csv(const std::string& path, const OcpSpec& spec,
                          const ClosedLoopRun& run);

/// sweep.csv: N, Ntilde, constraint_horizon, J, beta, alpha, applicable,
/// bound_holds, V0 (one row per cell; N.A. and failed cells carry NA).
void write_sweep_csv(const std::string& path, const SweepResult& result);

/// fig2_data.csv: constraint_horizon, measured_J, bound_V0_over_alpha,
/// restricted to applicable cells.
void write_fig2_csv(const std::string& path, const SweepResult& result);

std::string bound_report_json(const BoundReport& report);
std::string bound_report_json(const BoundReport& report, const BetaRecord& record);

/// Doubles are printed with %.17g so identical runs emit byte-identical
/// files.
std::string format_double(double v);

}  // namespace chmpc
