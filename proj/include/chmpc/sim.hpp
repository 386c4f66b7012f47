#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "chmpc/ocp.hpp"
#include "chmpc/subopt.hpp"

namespace chmpc {

struct StopRule {
    double eps = 1e-10;   // stop once l(x, mu_N(x)) < eps
    int max_steps = 2000;
};

enum class Termination { Converged, MaxSteps, Infeasible };

std::string to_string(Termination t);

/// A receding-horizon run: at every step the full problem is re-solved and
/// only the first input applied.
struct ClosedLoopRun {
    Eigen::MatrixXd states;            // nx x (T+1)
    Eigen::MatrixXd inputs;            // m x T
    Eigen::VectorXd stage_costs;       // size T
    Eigen::VectorXd open_loop_values;  // V_N at each state; NaN where never solved
    double J = 0.0;                    // sum of stage costs
    Termination terminated = Termination::Converged;
    std::vector<ValueTable> per_step;  // one table per solved state (certify mode)
    Eigen::VectorXd failing_state;     // set when terminated = Infeasible

    Eigen::Index steps() const { return inputs.cols(); }
};

/// Simulates the closed loop from x0. certify additionally computes the
/// full value table at every visited state (N extra solves per step) so a
/// BoundReport can be assembled afterwards. An infeasible solve mid-run
/// ends the run with Termination::Infeasible; it is never silently skipped.
ClosedLoopRun run_closed_loop(const OcpSpec& spec, const Eigen::VectorXd& x0,
                              const StopRule& stop = {}, bool certify = false);
ClosedLoopRun run_closed_loop(const CondensedFamily& family, const Eigen::VectorXd& x0,
                              const StopRule& stop = {}, bool certify = false);

/// The bound machinery applied to one certified run.
struct Certification {
    BetaRecord beta_record;
    BoundReport report;
    std::vector<Eigen::VectorXd> chain_margins;  // per sampled state
    double min_chain_margin = 0.0;
};

/// Requires run.per_step tables (certify = true). bound_tol is the slack
/// used for the alpha * J <= V0 verdict.
Certification certify_run(const OcpSpec& spec, const ClosedLoopRun& run,
                          double bound_tol = 1e-6);

struct SweepCell {
    int N = 0;
    int constraint_horizon = 0;
    int Ntilde = 0;
    bool not_applicable = false;  // constraint horizon exceeds N-1
    bool failed = false;
    std::string error;
    Termination terminated = Termination::Converged;
    double J = 0.0;
    BoundReport report;
    bool invariance_pass = false;
    int steps = 0;
};

struct SweepResult {
    std::vector<int> N_list;
    std::vector<int> ch_list;
    std::vector<SweepCell> cells;  // row-major over N_list x ch_list

    const SweepCell& at(int N, int ch) const;
};

/// Runs one certified closed loop per (N, constraint horizon) cell. Cells
/// whose constraint horizon exceeds N-1 are marked not_applicable; per-cell
/// failures are captured in the cell, never thrown. jobs > 1 runs cells
/// concurrently; assembly is slot-based so the result is order independent.
SweepResult sweep(const OcpSpec& base, const std::vector<int>& N_list,
                  const std::vector<int>& ch_list, const Eigen::VectorXd& x0,
                  const StopRule& stop = {}, int jobs = 1);

}  // namespace chmpc
