#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "chmpc/config.hpp"
#include "chmpc/sim.hpp"
#include "oracles.hpp"

using namespace chmpc;

namespace {

OcpSpec scalar_spec() {
    OcpSpec spec{
        DiscreteLTI(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)),
        StageCost(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)),
        2,
        1,
        InputBox::symmetric(1, 10.0),
        {},
        {},
    };
    return spec;
}

OcpSpec benchmark_spec(int N, int Ntilde) {
    RunConfig cfg = paper_benchmark();
    cfg.N = N;
    cfg.ntilde = Ntilde;
    cfg.constraint_horizon.reset();
    return make_spec(cfg);
}

}  // namespace

TEST_CASE("run from the equilibrium stops immediately") {
    OcpSpec spec = benchmark_spec(6, 3);
    ClosedLoopRun run = run_closed_loop(spec, Eigen::VectorXd::Zero(4));
    CHECK(run.terminated == Termination::Converged);
    CHECK(run.steps() == 0);
    CHECK(run.J == 0.0);
    CHECK(run.states.cols() == 1);
    CHECK(run.open_loop_values(0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("scalar closed loop matches the receding-horizon oracle") {
    OcpSpec spec = scalar_spec();
    StopRule stop{1e-10, 2000};
    ClosedLoopRun run = run_closed_loop(spec, Eigen::VectorXd::Ones(1), stop);
    CHECK(run.terminated == Termination::Converged);
    const double expect = oracles::closed_loop_oracle(1.0, stop.eps, stop.max_steps);
    CHECK(run.J == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("benchmark with a single constrained step converges safely") {
    OcpSpec spec = benchmark_spec(20, 19);
    ClosedLoopRun run = run_closed_loop(spec, paper_benchmark().x0);
    CHECK(run.terminated == Termination::Converged);
    CHECK(verify_invariance(constraint_set(spec), run.states, spec.feas_tol).pass);
}

TEST_CASE("barrier decay propagates along the realized trajectory") {
    // The applied input is the first predicted one, so the one-step decay
    // b(x+) >= (1-gamma) b(x) transfers from the plan to the closed loop,
    // which in turn keeps every barrier nonnegative.
    OcpSpec spec = benchmark_spec(8, 4);
    ClosedLoopRun run = run_closed_loop(spec, paper_benchmark().x0);
    REQUIRE(run.terminated == Termination::Converged);
    for (const AffineBarrier& b : spec.cbf_set) {
        for (Eigen::Index k = 0; k + 1 < run.states.cols(); ++k) {
            const double now = b.value(run.states.col(k));
            const double next = b.value(run.states.col(k + 1));
            CHECK(next >= (1.0 - b.gamma()) * now - 1e-7);
            CHECK(now >= -spec.feas_tol);
        }
    }
}

TEST_CASE("trajectory bookkeeping invariants") {
    OcpSpec spec = benchmark_spec(8, 4);
    ClosedLoopRun run = run_closed_loop(spec, paper_benchmark().x0);
    REQUIRE(run.terminated == Termination::Converged);
    REQUIRE(run.states.cols() == run.inputs.cols() + 1);
    CHECK(run.open_loop_values.size() == run.states.cols());

    // x(k+1) = f(x(k), u(k)) exactly and J is exactly the cost sum.
    double total = 0.0;
    for (Eigen::Index k = 0; k < run.inputs.cols(); ++k) {
        Eigen::VectorXd next = spec.sys.step(run.states.col(k), run.inputs.col(k));
        CHECK((next - run.states.col(k + 1)).cwiseAbs().maxCoeff() == 0.0);
        total += run.stage_costs(k);
        CHECK(run.stage_costs(k) ==
              doctest::Approx(spec.cost.evaluate(run.states.col(k), run.inputs.col(k))));
    }
    CHECK(run.J == doctest::Approx(total).epsilon(1e-15));

    // Open-loop value decreases along the run (relaxed DP with alpha = 0).
    for (Eigen::Index k = 0; k + 1 < run.open_loop_values.size(); ++k)
        CHECK(run.open_loop_values(k + 1) <= run.open_loop_values(k) + 1e-7);
}

TEST_CASE("max step cap is reported") {
    OcpSpec spec = benchmark_spec(8, 4);
    ClosedLoopRun run = run_closed_loop(spec, paper_benchmark().x0, StopRule{1e-10, 3});
    CHECK(run.terminated == Termination::MaxSteps);
    CHECK(run.steps() == 3);
    CHECK(std::isnan(run.open_loop_values(3)));  // final state never solved

    ClosedLoopRun certified =
        run_closed_loop(spec, paper_benchmark().x0, StopRule{1e-10, 3}, true);
    CHECK(certified.per_step.size() == 4);  // certification solves the final state too
    CHECK_FALSE(std::isnan(certified.open_loop_values(3)));
}

TEST_CASE("certified run carries tables and a coherent report") {
    OcpSpec spec = benchmark_spec(10, 5);
    ClosedLoopRun run = run_closed_loop(spec, paper_benchmark().x0, StopRule{}, true);
    REQUIRE(run.terminated == Termination::Converged);
    REQUIRE(static_cast<Eigen::Index>(run.per_step.size()) == run.states.cols());

    Certification cert = certify_run(spec, run);
    const BoundReport& rep = cert.report;
    CHECK(rep.N == 10);
    CHECK(rep.Ntilde == 5);
    CHECK(rep.beta > 0.0);
    CHECK(rep.applicable == (rep.alpha > 0.0));
    CHECK(rep.V0 == doctest::Approx(run.open_loop_values(0)));
    CHECK(rep.J == doctest::Approx(run.J));
    CHECK(rep.per_step_margins.size() == run.steps());
    CHECK(rep.min_stabilizing_N >= rep.Ntilde + 1);
    if (rep.applicable) CHECK(rep.alpha * rep.J <= rep.V0 + 1e-6);
    CHECK(cert.beta_record.matrix.rows() == spec.N - spec.Ntilde + 1);
    CHECK(cert.beta_record.matrix.cols() == run.states.cols());

    CHECK_THROWS_AS(certify_run(spec, run_closed_loop(spec, paper_benchmark().x0)),
                    std::invalid_argument);
}

TEST_CASE("fully constrained runs certify against the full-length exponent") {
    RunConfig cfg = paper_benchmark();
    cfg.N = 6;
    cfg.ntilde = 1;
    cfg.constraint_horizon.reset();
    OcpSpec spec = make_spec(cfg);
    spec.Ntilde = 0;
    spec.allow_fully_constrained = true;

    ClosedLoopRun run = run_closed_loop(spec, cfg.x0, StopRule{}, true);
    REQUIRE(run.terminated == Termination::Converged);
    Certification cert = certify_run(spec, run);
    CHECK(cert.report.fully_constrained);
    CHECK(cert.report.Ntilde == 0);
    // Same ratio formula evaluated at the full horizon length d = N.
    CHECK(cert.report.alpha ==
          doctest::Approx(detail::alpha_from_length(cert.report.beta, 6)).epsilon(1e-15));
    CHECK(cert.report.bound_holds);
}

TEST_CASE("degenerate certification at the equilibrium") {
    OcpSpec spec = benchmark_spec(6, 3);
    ClosedLoopRun run = run_closed_loop(spec, Eigen::VectorXd::Zero(4), StopRule{}, true);
    Certification cert = certify_run(spec, run);
    CHECK(cert.report.degenerate);
    CHECK_FALSE(cert.report.applicable);
    CHECK(cert.report.bound_holds);
}

TEST_CASE("infeasibility mid-run is reported, not skipped") {
    // p+ = p + v, v+ = v + u, |u| <= 0.05, constraint p <= 1. Initial
    // momentum guarantees the position overshoots despite full braking.
    Eigen::MatrixXd A(2, 2), B(2, 1);
    A << 1, 1, 0, 1;
    B << 0, 1;
    OcpSpec spec{
        DiscreteLTI(A, B),
        StageCost(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Ones(1, 1)),
        3,
        2,
        InputBox::symmetric(1, 0.05),
        {},
        {},
    };
    Eigen::VectorXd a(2);
    a << 1.0, 0.0;
    spec.state_constraints.push_back(AffineConstraint{a, 1.0});

    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.3;
    ClosedLoopRun run = run_closed_loop(spec, x0);
    CHECK(run.terminated == Termination::Infeasible);
    CHECK(run.failing_state.size() == 2);
    CHECK(run.states.cols() == run.inputs.cols() + 1);
    CHECK((run.failing_state - run.states.col(run.states.cols() - 1)).norm() == 0.0);
}

TEST_CASE("sweep grid, N.A. cells and determinism across worker counts") {
    RunConfig cfg = paper_benchmark();
    OcpSpec base = benchmark_spec(6, 3);
    std::vector<int> N_list{6};
    std::vector<int> ch_list{1, 3, 5, 7, 9};

    SweepResult serial = sweep(base, N_list, ch_list, cfg.x0, StopRule{}, 1);
    REQUIRE(serial.cells.size() == 5);
    CHECK(serial.at(6, 7).not_applicable);
    CHECK(serial.at(6, 9).not_applicable);
    for (int ch : {1, 3, 5}) {
        const SweepCell& cell = serial.at(6, ch);
        CHECK_FALSE(cell.failed);
        CHECK(cell.terminated == Termination::Converged);
        CHECK(cell.invariance_pass);
        CHECK(cell.Ntilde == 6 - ch);
        CHECK(cell.report.bound_holds);
    }

    SweepResult parallel = sweep(base, N_list, ch_list, cfg.x0, StopRule{}, 3);
    for (size_t i = 0; i < serial.cells.size(); ++i) {
        CHECK(serial.cells[i].not_applicable == parallel.cells[i].not_applicable);
        if (!serial.cells[i].not_applicable) {
            CHECK(serial.cells[i].J == parallel.cells[i].J);
            CHECK(serial.cells[i].report.beta == parallel.cells[i].report.beta);
        }
    }
}

TEST_CASE("sweep captures per-cell failures") {
    Eigen::MatrixXd A(2, 2), B(2, 1);
    A << 1, 1, 0, 1;
    B << 0, 1;
    OcpSpec base{
        DiscreteLTI(A, B),
        StageCost(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Ones(1, 1)),
        4,
        2,
        InputBox::symmetric(1, 0.05),
        {},
        {},
    };
    Eigen::VectorXd a(2);
    a << 1.0, 0.0;
    base.state_constraints.push_back(AffineConstraint{a, 1.0});

    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.3;
    SweepResult result = sweep(base, {4}, {1, 2}, x0, StopRule{1e-10, 50}, 1);
    for (const auto& cell : result.cells) {
        CHECK_FALSE(cell.not_applicable);
        const bool captured = cell.failed || cell.terminated == Termination::Infeasible;
        CHECK(captured);
    }
}
