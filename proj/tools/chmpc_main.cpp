#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "chmpc/config.hpp"
#include "chmpc/errors.hpp"
#include "chmpc/io.hpp"
#include "chmpc/sim.hpp"

namespace fs = std::filesystem;
using namespace chmpc;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset = "paper-benchmark";
    std::optional<int> N;
    std::optional<int> ntilde;
    std::optional<int> constraint_horizon;
    std::string out_dir = ".";
    std::optional<double> eps;
    std::optional<int> max_steps;
    std::optional<double> tol;
    std::optional<unsigned> seed;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_single_horizon) {
    cmd->add_option("--config", o.config_path, "Config file (overrides the preset)");
    cmd->add_option("--preset", o.preset, "Built-in preset (paper-benchmark)");
    if (with_single_horizon) {
        cmd->add_option("--N", o.N, "Prediction horizon override");
        cmd->add_option("--ntilde", o.ntilde, "Unconstrained tail length override");
        cmd->add_option("--constraint-horizon", o.constraint_horizon,
                        "Constraint horizon override (N - ntilde)");
    }
    cmd->add_option("--out-dir", o.out_dir, "Output directory");
    cmd->add_option("--eps", o.eps, "Convergence threshold on the stage cost");
    cmd->add_option("--max-steps", o.max_steps, "Closed-loop step cap");
    cmd->add_option("--tol", o.tol, "QP solver absolute/relative tolerance");
    cmd->add_option("--seed", o.seed, "Run seed recorded in outputs");
}

RunConfig resolve_config(const CommonOpts& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) {
        cfg = parse_config_file(o.config_path);
    } else if (o.preset == "paper-benchmark") {
        cfg = paper_benchmark();
    } else {
        throw ConfigError("preset", "unknown preset '" + o.preset + "'");
    }
    if (o.N) cfg.N = *o.N;
    if (o.ntilde && o.constraint_horizon)
        throw ConfigError("run.ntilde",
                          "exactly one of ntilde / constraint_horizon must be given");
    if (o.ntilde) {
        cfg.ntilde = *o.ntilde;
        cfg.constraint_horizon.reset();
    }
    if (o.constraint_horizon) {
        cfg.constraint_horizon = *o.constraint_horizon;
        cfg.ntilde.reset();
    }
    if (o.eps) cfg.eps = *o.eps;
    if (o.max_steps) cfg.max_steps = *o.max_steps;
    if (o.tol) {
        cfg.abs_tol = *o.tol;
        cfg.rel_tol = *o.tol;
    }
    if (o.seed) cfg.seed = *o.seed;
    return cfg;
}

// "8..19" or "1,3,5,7" or "4"
std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    const auto range = text.find("..");
    if (range != std::string::npos) {
        const int lo = std::stoi(text.substr(0, range));
        const int hi = std::stoi(text.substr(range + 2));
        if (hi < lo) throw ConfigError(flag, "empty range '" + text + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw ConfigError(flag, "empty list '" + text + "'");
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out << content;
}

int cmd_run(const CommonOpts& opts) {
    RunConfig cfg = resolve_config(opts);
    OcpSpec spec = make_spec(cfg);
    CondensedFamily family(spec);

    if (!family.in_constraint_set(cfg.x0, spec.feas_tol)) {
        BarrierSet set = constraint_set(spec);
        InvarianceReport rep = verify_invariance(set, std::vector<Eigen::VectorXd>{cfg.x0},
                                                 spec.feas_tol);
        std::cerr << "x0 violates the safe set: worst margin " << rep.min_margin
                  << " at constraint " << rep.worst_constraint << "\n";
        return 2;
    }

    ClosedLoopRun run = run_closed_loop(family, cfg.x0, make_stop_rule(cfg), /*certify=*/true);
    fs::create_directories(opts.out_dir);
    write_trajectory_csv((fs::path(opts.out_dir) / "trajectory.csv").string(), spec, run);

    Certification cert = certify_run(spec, run);
    write_file(fs::path(opts.out_dir) / "bound_report.json",
               bound_report_json(cert.report, cert.beta_record) + "\n");

    std::cout << "terminated: " << to_string(run.terminated) << " after " << run.steps()
              << " steps, J = " << format_double(run.J) << "\n";
    if (!cert.report.degenerate) {
        std::cout << "beta = " << format_double(cert.report.beta)
                  << ", alpha = " << format_double(cert.report.alpha)
                  << ", applicable = " << (cert.report.applicable ? "true" : "false")
                  << ", bound_holds = " << (cert.report.bound_holds ? "true" : "false") << "\n";
    } else {
        std::cout << "degenerate trajectory: no beta samples\n";
    }
    return run.terminated == Termination::Infeasible ? 2 : 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& n_text, const std::string& ch_text,
              int jobs) {
    RunConfig cfg = resolve_config(opts);
    std::vector<int> N_list = n_text.empty() ? std::vector<int>{cfg.N}
                                             : parse_int_list(n_text, "--N");
    std::vector<int> ch_list = parse_int_list(ch_text, "--constraint-horizons");

    // Validate the base once on the first feasible grid point.
    RunConfig probe = cfg;
    probe.ntilde = 1;
    probe.constraint_horizon.reset();
    probe.N = 2;
    OcpSpec base = make_spec(probe);

    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;

    SweepResult result = sweep(base, N_list, ch_list, cfg.x0, make_stop_rule(cfg), jobs);
    fs::create_directories(opts.out_dir);
    write_sweep_csv((fs::path(opts.out_dir) / "sweep.csv").string(), result);
    write_fig2_csv((fs::path(opts.out_dir) / "fig2_data.csv").string(), result);

    int infeasible = 0;
    int failed = 0;
    for (const auto& cell : result.cells) {
        if (cell.not_applicable) continue;
        if (cell.failed) ++failed;
        if (cell.terminated == Termination::Infeasible) ++infeasible;
    }
    std::cout << "sweep: " << result.cells.size() << " cells, " << failed << " failed, "
              << infeasible << " infeasible\n";
    return (failed + infeasible) > 0 ? 2 : 0;
}

int cmd_check(const CommonOpts& opts, double margin_tol) {
    RunConfig cfg = resolve_config(opts);
    OcpSpec spec = make_spec(cfg);
    CondensedFamily family(spec);

    ClosedLoopRun run = run_closed_loop(family, cfg.x0, make_stop_rule(cfg), /*certify=*/true);
    bool ok = true;
    auto report = [&](const std::string& name, bool pass, double worst) {
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name
                  << " (worst margin " << format_double(worst) << ")\n";
        ok = ok && pass;
    };

    if (run.terminated == Termination::Infeasible) {
        std::cout << "[FAIL] run infeasible\n";
        return 1;
    }

    Certification cert = certify_run(spec, run);
    if (cert.report.degenerate) {
        std::cout << "[PASS] degenerate trajectory (no certification data)\n";
        return 0;
    }

    const double l1_min = cert.report.per_step_margins.size() > 0
                              ? cert.report.per_step_margins.minCoeff()
                              : 0.0;
    report("per-step decrease (relaxed DP)", l1_min >= -margin_tol, l1_min);
    report("value chain margins", cert.min_chain_margin >= -margin_tol,
           cert.min_chain_margin);

    const double bound_gap = cert.report.applicable
                                 ? cert.report.V0 - cert.report.alpha * cert.report.J
                                 : 0.0;
    report("closed-loop cost bound", cert.report.bound_holds, bound_gap);

    InvarianceReport inv = verify_invariance(constraint_set(spec), run.states, spec.feas_tol);
    report("trajectory stays in the safe set", inv.pass, inv.min_margin);

    std::cout << "beta = " << format_double(cert.report.beta)
              << ", alpha = " << format_double(cert.report.alpha)
              << ", applicable = " << (cert.report.applicable ? "true" : "false") << "\n";
    return ok ? 0 : 1;
}

int cmd_dump_config(const CommonOpts& opts, const std::string& out_path) {
    RunConfig cfg = resolve_config(opts);
    const std::string text = dump_config(cfg);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Receding-horizon control with a constraint horizon, CBF safe sets and "
                 "online suboptimality certification"};
    app.require_subcommand(1);

    CommonOpts run_opts, sweep_opts, check_opts, dump_opts;
    std::string sweep_n, sweep_ch = "1..9";
    int jobs = 0;
    double margin_tol = 1e-6;
    std::string dump_out;

    CLI::App* run = app.add_subcommand("run", "One closed-loop run with certification");
    add_common(run, run_opts, true);

    CLI::App* sw = app.add_subcommand("sweep", "Grid of runs over (N, constraint horizon)");
    add_common(sw, sweep_opts, false);
    sw->add_option("--N", sweep_n, "Prediction horizons, e.g. 6,13,20");
    sw->add_option("--constraint-horizons", sweep_ch, "Constraint horizons, e.g. 8..19");
    sw->add_option("--jobs", jobs, "Worker pool size (0 = number of processors)");

    CLI::App* check = app.add_subcommand("check", "Run all certification invariants");
    add_common(check, check_opts, true);

    CLI::App* dump = app.add_subcommand("dump-config", "Print the effective config");
    add_common(dump, dump_opts, true);
    dump->add_option("-o,--out", dump_out, "Write to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (sw->parsed()) return cmd_sweep(sweep_opts, sweep_n, sweep_ch, jobs);
        if (check->parsed()) return cmd_check(check_opts, margin_tol);
        if (dump->parsed()) return cmd_dump_config(dump_opts, dump_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const InfeasibleOcp& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
