"""Receding-horizon control with a constraint horizon.

Partially constrained optimal control, discrete-time control barrier
functions, closed-loop simulation and online suboptimality certification.
"""

from ._core import (
    AffineBarrier,
    BetaCandidates,
    BetaRecord,
    BoundReport,
    ClosedLoopRun,
    ConfigFileError,
    DegenerateTrajectoryError,
    DiscreteLTI,
    InfeasibleOcpError,
    OcpSpec,
    OpenLoopSolution,
    QpSolution,
    QpStatus,
    RunConfig,
    SolverFailureError,
    StageCost,
    Termination,
    UnsupportedBarrierError,
    ValueTable,
    aggregate_beta,
    alpha_of,
    applicability,
    bellman_residual,
    beta_candidates,
    bound_report_json,
    certify_run,
    decrease_margin,
    double_integrator,
    dump_config,
    eta_coefficient,
    make_spec,
    min_stabilizing_horizon,
    paper_benchmark,
    parse_config,
    run_closed_loop,
    solve_equality_kkt,
    solve_partially_constrained,
    solve_qp,
    value_chain_margins,
    value_family,
)

__all__ = [
    "AffineBarrier",
    "BetaCandidates",
    "BetaRecord",
    "BoundReport",
    "ClosedLoopRun",
    "ConfigFileError",
    "DegenerateTrajectoryError",
    "DiscreteLTI",
    "InfeasibleOcpError",
    "OcpSpec",
    "OpenLoopSolution",
    "QpSolution",
    "QpStatus",
    "RunConfig",
    "SolverFailureError",
    "StageCost",
    "Termination",
    "UnsupportedBarrierError",
    "ValueTable",
    "aggregate_beta",
    "alpha_of",
    "applicability",
    "bellman_residual",
    "beta_candidates",
    "bound_report_json",
    "certify_run",
    "decrease_margin",
    "double_integrator",
    "dump_config",
    "eta_coefficient",
    "make_spec",
    "min_stabilizing_horizon",
    "paper_benchmark",
    "parse_config",
    "run_closed_loop",
    "solve_equality_kkt",
    "solve_partially_constrained",
    "solve_qp",
    "value_chain_margins",
    "value_family",
]
