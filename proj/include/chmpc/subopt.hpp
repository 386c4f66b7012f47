#pragma once

#include <Eigen/Core>

#include <vector>

#include "chmpc/ocp.hpp"

namespace chmpc {

/// Per-state suboptimality ratio candidates. Entry 0 is
/// V_{Ntilde+1}/V_Ntilde - 1, entries k = 1..N-Ntilde are
/// V_n / l(x, mu_n(x)) - 1 for n = Ntilde+k. Entries whose denominator is
/// below denom_tol are skipped and stored as NaN.
struct BetaCandidates {
    Eigen::VectorXd entries;  // size N - Ntilde + 1, NaN marks a skip
    int skipped = 0;
};

BetaCandidates beta_candidates(const ValueTable& table, double denom_tol = 1e-9);

/// The (N-Ntilde+1) x T candidate matrix accumulated over a trajectory and
/// the aggregated beta (max candidate, floored at beta_min).
struct BetaRecord {
    Eigen::MatrixXd matrix;  // NaN marks skipped entries
    int skipped = 0;
    double beta = 0.0;
    double beta_min = 1e-6;

    Eigen::Index samples() const { return matrix.cols(); }
};

/// Throws DegenerateTrajectory when every entry of every column is skipped.
BetaRecord aggregate_beta(const std::vector<BetaCandidates>& columns, double beta_min = 1e-6);

/// Suboptimality degree alpha = 1 - beta^{N-Ntilde+1} / (beta+1)^{N-Ntilde-1}.
/// Large exponents are evaluated in log space so the comparison never
/// overflows. Requires beta > 0, N >= 2, 1 <= Ntilde <= N-1.
double alpha_of(double beta, int N, int Ntilde);

/// True iff (beta+1)^{N-Ntilde-1} > beta^{N-Ntilde+1}, equivalently
/// alpha_of(beta, N, Ntilde) > 0.
bool applicability(double beta, int N, int Ntilde);

/// Smallest N satisfying
///   N >= ceil(Ntilde + (log(beta+1)+log(beta)) / (log(beta+1)-log(beta))),
/// floored at the structural minimum Ntilde + 1. Requires beta > 0,
/// Ntilde >= 1.
int min_stabilizing_horizon(double beta, int Ntilde);

/// eta_n = (beta+1)^{n-Ntilde-1} / ((beta+1)^{n-Ntilde-1} + beta^{n-Ntilde}),
/// the chain coefficient linking V_{n-1} and V_n.
double eta_coefficient(double beta, int n, int Ntilde);

/// Relaxed-DP decrease margin at x:
///   V_N(x) - V_N(f(x, mu_N(x))) - alpha * l(x, mu_N(x)).
/// Nonnegative margin certifies the per-step bound.
double decrease_margin(const OcpSpec& spec, const Eigen::VectorXd& x, double alpha);
double decrease_margin(const CondensedFamily& family, const Eigen::VectorXd& x, double alpha);

/// Margins V_{n-1}(x) - eta_n V_n(x) for n = Ntilde+1..N; all nonnegative
/// (to tolerance) when the beta used certified the trajectory.
Eigen::VectorXd value_chain_margins(const ValueTable& table, double beta);

/// Everything the certifier concludes about one closed-loop run.
struct BoundReport {
    int N = 0;
    int Ntilde = 0;
    double beta = 0.0;
    double alpha = 0.0;
    bool applicable = false;         // (beta+1)^{N-Ntilde-1} > beta^{N-Ntilde+1}
    double V0 = 0.0;                 // V_N at the initial state
    double J = 0.0;                  // accumulated closed-loop cost
    bool bound_holds = true;         // alpha * J <= V0 + tol when applicable
    Eigen::VectorXd per_step_margins; // decrease margins along the run
    int min_stabilizing_N = 0;
    bool degenerate = false;         // no usable beta samples
    bool fully_constrained = false;  // Ntilde = 0 run, outside the certified range
};

namespace detail {
// Ratio beta^{d+1}/(beta+1)^{d-1} for exponent length d = N - Ntilde,
// shared by the certification range and the fully constrained case.
double alpha_from_length(double beta, int d);
bool applicability_from_length(double beta, int d);
int min_horizon_from_ratio(double beta, int Ntilde);
}  // namespace detail

}  // namespace chmpc
