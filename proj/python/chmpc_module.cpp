#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chmpc/config.hpp"
#include "chmpc/errors.hpp"
#include "chmpc/io.hpp"
#include "chmpc/sim.hpp"

namespace py = pybind11;
using namespace chmpc;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Receding-horizon control with a constraint horizon: partially "
              "constrained OCPs, CBF safe sets, closed-loop simulation and "
              "online suboptimality certification.";

    py::register_exception<InfeasibleOcp>(m, "InfeasibleOcpError", PyExc_RuntimeError);
    py::register_exception<DegenerateTrajectory>(m, "DegenerateTrajectoryError",
                                                 PyExc_RuntimeError);
    py::register_exception<UnsupportedBarrier>(m, "UnsupportedBarrierError", PyExc_ValueError);
    py::register_exception<SolverFailure>(m, "SolverFailureError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigFileError", PyExc_ValueError);

    py::class_<DiscreteLTI>(m, "DiscreteLTI")
        .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd>(), py::arg("A"), py::arg("B"))
        .def_property_readonly("A", &DiscreteLTI::A)
        .def_property_readonly("B", &DiscreteLTI::B)
        .def_property_readonly("state_dim", &DiscreteLTI::state_dim)
        .def_property_readonly("input_dim", &DiscreteLTI::input_dim)
        .def("step", &DiscreteLTI::step, py::arg("x"), py::arg("u"));

    m.def("double_integrator", &double_integrator, py::arg("dt"),
          "Exact zero-order-hold planar double integrator.");

    py::class_<StageCost>(m, "StageCost")
        .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd>(), py::arg("Q"), py::arg("R"))
        .def_property_readonly("Q", &StageCost::Q)
        .def_property_readonly("R", &StageCost::R)
        .def("evaluate", &StageCost::evaluate, py::arg("x"), py::arg("u"));

    py::enum_<QpStatus>(m, "QpStatus")
        .value("Optimal", QpStatus::Optimal)
        .value("Infeasible", QpStatus::Infeasible)
        .value("MaxIterations", QpStatus::MaxIterations);

    py::class_<QpSolution>(m, "QpSolution")
        .def_readonly("z", &QpSolution::z)
        .def_readonly("lam", &QpSolution::lambda)
        .def_readonly("value", &QpSolution::value)
        .def_readonly("status", &QpSolution::status)
        .def_readonly("iterations", &QpSolution::iterations)
        .def_readonly("primal_residual", &QpSolution::primal_residual)
        .def_readonly("dual_residual", &QpSolution::dual_residual)
        .def_readonly("polished", &QpSolution::polished);

    m.def(
        "solve_qp",
        [](const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& G,
           const Eigen::VectorXd& h, double abs_tol, double rel_tol, int max_iter) {
            QpSettings s;
            s.abs_tol = abs_tol;
            s.rel_tol = rel_tol;
            s.max_iter = max_iter;
            return solve_qp(QpProblem(H, g, G, h), s);
        },
        py::arg("H"), py::arg("g"), py::arg("G"), py::arg("h"), py::arg("abs_tol") = 1e-8,
        py::arg("rel_tol") = 1e-8, py::arg("max_iter") = 50000,
        "Solve min 0.5 z'Hz + g'z subject to G z <= h.");

    m.def("solve_equality_kkt", &solve_equality_kkt, py::arg("H"), py::arg("g"),
          py::arg("Aeq"), py::arg("beq"));

    py::class_<AffineBarrier>(m, "AffineBarrier")
        .def(py::init<Eigen::VectorXd, double, double>(), py::arg("a"), py::arg("c"),
             py::arg("gamma"))
        .def_property_readonly("a", &AffineBarrier::a)
        .def_property_readonly("c", &AffineBarrier::c)
        .def_property_readonly("gamma", &AffineBarrier::gamma)
        .def("value", &AffineBarrier::value, py::arg("x"));

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("preset", &RunConfig::preset)
        .def_readwrite("dt", &RunConfig::dt)
        .def_readwrite("Q", &RunConfig::Q)
        .def_readwrite("R", &RunConfig::R)
        .def_readwrite("u_lower", &RunConfig::u_lower)
        .def_readwrite("u_upper", &RunConfig::u_upper)
        .def_readwrite("x0", &RunConfig::x0)
        .def_readwrite("N", &RunConfig::N)
        .def_readwrite("eps", &RunConfig::eps)
        .def_readwrite("max_steps", &RunConfig::max_steps)
        .def_property(
            "ntilde", [](const RunConfig& c) { return c.ntilde; },
            [](RunConfig& c, std::optional<int> v) {
                c.ntilde = v;
                if (v) c.constraint_horizon.reset();
            })
        .def_property(
            "constraint_horizon", [](const RunConfig& c) { return c.constraint_horizon; },
            [](RunConfig& c, std::optional<int> v) {
                c.constraint_horizon = v;
                if (v) c.ntilde.reset();
            })
        .def("set_system", [](RunConfig& c, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B) {
            c.preset = "none";
            c.A = A;
            c.B = B;
        })
        .def("add_barrier",
             [](RunConfig& c, const Eigen::VectorXd& a, double offset, double gamma) {
                 c.barriers.emplace_back(a, offset, gamma);
             })
        .def("add_state_constraint", [](RunConfig& c, const Eigen::VectorXd& a, double b) {
            c.state_constraints.push_back(AffineConstraint{a, b});
        });

    m.def("paper_benchmark", &paper_benchmark);
    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("dump_config", &dump_config, py::arg("config"));

    py::class_<OcpSpec>(m, "OcpSpec")
        .def_readonly("N", &OcpSpec::N)
        .def_readonly("Ntilde", &OcpSpec::Ntilde)
        .def_property_readonly("constraint_horizon", &OcpSpec::constraint_horizon);

    m.def("make_spec", &make_spec, py::arg("config"));

    py::class_<OpenLoopSolution>(m, "OpenLoopSolution")
        .def_readonly("inputs", &OpenLoopSolution::inputs)
        .def_readonly("states", &OpenLoopSolution::states)
        .def_readonly("value", &OpenLoopSolution::value)
        .def_readonly("feasible", &OpenLoopSolution::feasible);

    py::class_<ValueTable>(m, "ValueTable")
        .def_readonly("N", &ValueTable::N)
        .def_readonly("Ntilde", &ValueTable::Ntilde)
        .def_readonly("state", &ValueTable::state)
        .def_readonly("values", &ValueTable::values)
        .def_readonly("first_inputs", &ValueTable::first_inputs)
        .def_readonly("first_stage_costs", &ValueTable::first_stage_costs);

    m.def(
        "solve_partially_constrained",
        [](const OcpSpec& spec, const Eigen::VectorXd& x0) {
            return solve_partially_constrained(spec, x0);
        },
        py::arg("spec"), py::arg("x0"));
    m.def(
        "value_family",
        [](const OcpSpec& spec, const Eigen::VectorXd& x) { return value_family(spec, x); },
        py::arg("spec"), py::arg("x"));
    m.def(
        "bellman_residual",
        [](const OcpSpec& spec, const Eigen::VectorXd& x, int n) {
            return bellman_residual(spec, x, n);
        },
        py::arg("spec"), py::arg("x"), py::arg("n"));

    py::class_<BetaCandidates>(m, "BetaCandidates")
        .def_readonly("entries", &BetaCandidates::entries)
        .def_readonly("skipped", &BetaCandidates::skipped);

    py::class_<BetaRecord>(m, "BetaRecord")
        .def_readonly("matrix", &BetaRecord::matrix)
        .def_readonly("skipped", &BetaRecord::skipped)
        .def_readonly("beta", &BetaRecord::beta)
        .def_readonly("beta_min", &BetaRecord::beta_min)
        .def_property_readonly("samples", &BetaRecord::samples);

    m.def("beta_candidates", &beta_candidates, py::arg("table"),
          py::arg("denom_tol") = 1e-9);
    m.def("aggregate_beta", &aggregate_beta, py::arg("columns"),
          py::arg("beta_min") = 1e-6);
    m.def("alpha_of", &alpha_of, py::arg("beta"), py::arg("N"), py::arg("ntilde"));
    m.def("applicability", &applicability, py::arg("beta"), py::arg("N"), py::arg("ntilde"));
    m.def("min_stabilizing_horizon", &min_stabilizing_horizon, py::arg("beta"),
          py::arg("ntilde"));
    m.def("eta_coefficient", &eta_coefficient, py::arg("beta"), py::arg("n"),
          py::arg("ntilde"));
    m.def(
        "decrease_margin",
        [](const OcpSpec& spec, const Eigen::VectorXd& x, double alpha) {
            return decrease_margin(spec, x, alpha);
        },
        py::arg("spec"), py::arg("x"), py::arg("alpha"));
    m.def(
        "value_chain_margins",
        [](const ValueTable& t, double beta) { return value_chain_margins(t, beta); },
        py::arg("table"), py::arg("beta"));

    py::enum_<Termination>(m, "Termination")
        .value("Converged", Termination::Converged)
        .value("MaxSteps", Termination::MaxSteps)
        .value("Infeasible", Termination::Infeasible);

    py::class_<ClosedLoopRun>(m, "ClosedLoopRun")
        .def_readonly("states", &ClosedLoopRun::states)
        .def_readonly("inputs", &ClosedLoopRun::inputs)
        .def_readonly("stage_costs", &ClosedLoopRun::stage_costs)
        .def_readonly("open_loop_values", &ClosedLoopRun::open_loop_values)
        .def_readonly("J", &ClosedLoopRun::J)
        .def_readonly("terminated", &ClosedLoopRun::terminated)
        .def_property_readonly("steps", &ClosedLoopRun::steps);

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("N", &BoundReport::N)
        .def_readonly("Ntilde", &BoundReport::Ntilde)
        .def_readonly("beta", &BoundReport::beta)
        .def_readonly("alpha", &BoundReport::alpha)
        .def_readonly("applicable", &BoundReport::applicable)
        .def_readonly("V0", &BoundReport::V0)
        .def_readonly("J", &BoundReport::J)
        .def_readonly("bound_holds", &BoundReport::bound_holds)
        .def_readonly("per_step_margins", &BoundReport::per_step_margins)
        .def_readonly("min_stabilizing_N", &BoundReport::min_stabilizing_N)
        .def_readonly("degenerate", &BoundReport::degenerate);

    m.def(
        "run_closed_loop",
        [](const OcpSpec& spec, const Eigen::VectorXd& x0, double eps, int max_steps,
           bool certify) {
            return run_closed_loop(spec, x0, StopRule{eps, max_steps}, certify);
        },
        py::arg("spec"), py::arg("x0"), py::arg("eps") = 1e-10, py::arg("max_steps") = 2000,
        py::arg("certify") = false);

    m.def(
        "certify_run",
        [](const OcpSpec& spec, const ClosedLoopRun& run) {
            return certify_run(spec, run).report;
        },
        py::arg("spec"), py::arg("run"),
        "Bound report for a run executed with certify=True.");

    m.def(
        "bound_report_json",
        [](const BoundReport& r) { return bound_report_json(r); }, py::arg("report"));
}
