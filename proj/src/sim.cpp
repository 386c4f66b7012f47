#include "chmpc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "chmpc/errors.hpp"

namespace chmpc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::MaxSteps: return "max_steps";
        case Termination::Infeasible: return "infeasible";
    }
    return "unknown";
}

ClosedLoopRun run_closed_loop(const CondensedFamily& family, const Eigen::VectorXd& x0,
                              const StopRule& stop, bool certify) {
    const OcpSpec& spec = family.spec();
    const Eigen::Index nx = spec.sys.state_dim();
    const Eigen::Index m = spec.sys.input_dim();
    if (x0.size() != nx) throw std::invalid_argument("run_closed_loop: x0 dimension mismatch");
    if (!(stop.eps > 0.0) || stop.max_steps < 0)
        throw std::invalid_argument("run_closed_loop: invalid stop rule");

    std::vector<Eigen::VectorXd> states{x0};
    std::vector<Eigen::VectorXd> inputs;
    std::vector<double> costs;
    std::vector<double> values;

    ClosedLoopRun run;
    Eigen::VectorXd x = x0;
    const ValueTable* warm_table = nullptr;
    Eigen::VectorXd warm_full;

    while (true) {
        const bool at_cap = static_cast<int>(inputs.size()) >= stop.max_steps;
        if (at_cap && !certify) {
            values.push_back(kNaN);
            run.terminated = Termination::MaxSteps;
            break;
        }

        Eigen::VectorXd mu;
        double v_here = 0.0;
        try {
            if (certify) {
                ValueTable table = value_family(family, x, warm_table);
                v_here = table.values(spec.N);
                mu = table.first_inputs.col(spec.N - 1);
                run.per_step.push_back(std::move(table));
                warm_table = &run.per_step.back();
            } else {
                const Eigen::VectorXd* warm = warm_full.size() > 0 ? &warm_full : nullptr;
                OpenLoopSolution sol = family.solve(spec.N, x, warm);
                v_here = sol.value;
                mu = sol.inputs.col(0);
                warm_full = std::move(sol.stacked);
            }
        } catch (const InfeasibleOcp&) {
            run.terminated = Termination::Infeasible;
            run.failing_state = x;
            values.push_back(kNaN);
            break;
        }
        values.push_back(v_here);

        if (at_cap) {
            run.terminated = Termination::MaxSteps;
            break;
        }
        const double l = spec.cost.evaluate(x, mu);
        if (l < stop.eps) {
            run.terminated = Termination::Converged;
            break;
        }

        inputs.push_back(mu);
        costs.push_back(l);
        x = spec.sys.step(x, mu);
        states.push_back(x);
    }

    const Eigen::Index T = static_cast<Eigen::Index>(inputs.size());
    run.states.resize(nx, T + 1);
    for (Eigen::Index k = 0; k <= T; ++k) run.states.col(k) = states[static_cast<size_t>(k)];
    run.inputs.resize(m, T);
    run.stage_costs.resize(T);
    for (Eigen::Index k = 0; k < T; ++k) {
        run.inputs.col(k) = inputs[static_cast<size_t>(k)];
        run.stage_costs(k) = costs[static_cast<size_t>(k)];
    }
    run.open_loop_values.resize(static_cast<Eigen::Index>(values.size()));
    for (size_t k = 0; k < values.size(); ++k)
        run.open_loop_values(static_cast<Eigen::Index>(k)) = values[k];
    run.J = run.stage_costs.sum();
    return run;
}

ClosedLoopRun run_closed_loop(const OcpSpec& spec, const Eigen::VectorXd& x0,
                              const StopRule& stop, bool certify) {
    CondensedFamily family(spec);
    return run_closed_loop(family, x0, stop, certify);
}

Certification certify_run(const OcpSpec& spec, const ClosedLoopRun& run, double bound_tol) {
    if (run.per_step.empty())
        throw std::invalid_argument("certify_run: run has no value tables (certify = false?)");

    Certification cert;
    BoundReport& rep = cert.report;
    rep.N = spec.N;
    rep.Ntilde = spec.Ntilde;
    rep.fully_constrained = spec.Ntilde == 0;
    rep.V0 = run.per_step.front().values(spec.N);
    rep.J = run.J;

    std::vector<BetaCandidates> columns;
    columns.reserve(run.per_step.size());
    for (const auto& table : run.per_step) columns.push_back(beta_candidates(table));

    try {
        cert.beta_record = aggregate_beta(columns);
    } catch (const DegenerateTrajectory&) {
        rep.degenerate = true;
        rep.beta = kNaN;
        rep.alpha = kNaN;
        rep.applicable = false;
        rep.bound_holds = true;  // J = 0 against V0 >= 0
        rep.min_stabilizing_N = 0;
        cert.min_chain_margin = 0.0;
        return cert;
    }

    rep.beta = cert.beta_record.beta;
    rep.alpha = detail::alpha_from_length(rep.beta, spec.N - spec.Ntilde);
    rep.applicable = rep.alpha > 0.0;
    rep.bound_holds = !rep.applicable || rep.alpha * rep.J <= rep.V0 + bound_tol;
    rep.min_stabilizing_N = detail::min_horizon_from_ratio(rep.beta, spec.Ntilde);

    // Per-step relaxed-DP margins: V_N(x_k) - V_N(x_{k+1}) - alpha l_k over
    // consecutive solved states.
    const Eigen::Index pairs =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(run.per_step.size()) - 1,
                               run.stage_costs.size());
    rep.per_step_margins.resize(std::max<Eigen::Index>(pairs, 0));
    const double alpha_used = rep.applicable ? rep.alpha : 0.0;
    for (Eigen::Index k = 0; k < pairs; ++k) {
        const double v_now = run.per_step[static_cast<size_t>(k)].values(spec.N);
        const double v_next = run.per_step[static_cast<size_t>(k) + 1].values(spec.N);
        rep.per_step_margins(k) = v_now - v_next - alpha_used * run.stage_costs(k);
    }

    cert.chain_margins.reserve(run.per_step.size());
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& table : run.per_step) {
        Eigen::VectorXd margins = value_chain_margins(table, rep.beta);
        min_margin = std::min(min_margin, margins.minCoeff());
        cert.chain_margins.push_back(std::move(margins));
    }
    cert.min_chain_margin = min_margin;
    return cert;
}

const SweepCell& SweepResult::at(int N, int ch) const {
    for (const auto& cell : cells)
        if (cell.N == N && cell.constraint_horizon == ch) return cell;
    throw std::out_of_range("SweepResult::at: no such cell");
}

SweepResult sweep(const OcpSpec& base, const std::vector<int>& N_list,
                  const std::vector<int>& ch_list, const Eigen::VectorXd& x0,
                  const StopRule& stop, int jobs) {
    if (N_list.empty() || ch_list.empty())
        throw std::invalid_argument("sweep: empty grid");
    jobs = std::max(1, jobs);

    SweepResult result;
    result.N_list = N_list;
    result.ch_list = ch_list;
    result.cells.resize(N_list.size() * ch_list.size());

    auto run_cell = [&](size_t index) {
        SweepCell& cell = result.cells[index];
        cell.N = N_list[index / ch_list.size()];
        cell.constraint_horizon = ch_list[index % ch_list.size()];
        if (cell.constraint_horizon < 1 || cell.constraint_horizon > cell.N - 1) {
            cell.not_applicable = true;
            return;
        }
        cell.Ntilde = cell.N - cell.constraint_horizon;
        try {
            OcpSpec spec = base;
            spec.N = cell.N;
            spec.Ntilde = cell.Ntilde;
            CondensedFamily family(spec);
            ClosedLoopRun run = run_closed_loop(family, x0, stop, /*certify=*/true);
            cell.terminated = run.terminated;
            cell.J = run.J;
            cell.steps = static_cast<int>(run.steps());
            cell.report = certify_run(spec, run).report;
            cell.invariance_pass = verify_invariance(constraint_set(spec), run.states,
                                                     spec.feas_tol).pass;
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
        }
    };

    if (jobs == 1) {
        for (size_t i = 0; i < result.cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        const int workers = std::min<int>(jobs, static_cast<int>(result.cells.size()));
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const size_t i = next.fetch_add(1);
                    if (i >= result.cells.size()) return;
                    run_cell(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return result;
}

}  // namespace chmpc
