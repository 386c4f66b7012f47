#pragma once

#include <Eigen/Core>

#include <memory>
#include <vector>

#include "chmpc/cbf.hpp"
#include "chmpc/lti.hpp"
#include "chmpc/qp.hpp"

namespace chmpc {

/// Per-coordinate input bounds; +-infinity entries disable a side.
struct InputBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static InputBox unbounded(Eigen::Index m);
    static InputBox symmetric(Eigen::Index m, double limit);
};

/// The partially constrained optimal control problem: quadratic cost over
/// the full prediction horizon N, input bounds on every step, state and
/// CBF constraints only on the constraint horizon (the first N - Ntilde
/// predicted states). Ntilde = 0 (constraints over the whole horizon) is
/// the classical formulation and must be opted into explicitly; it sits
/// outside the certification theory's hypotheses.
struct OcpSpec {
    DiscreteLTI sys;
    StageCost cost;
    int N = 0;
    int Ntilde = 0;
    InputBox input_box;
    std::vector<AffineConstraint> state_constraints;  // a'x <= b per constrained state
    std::vector<AffineBarrier> cbf_set;               // decay constraints per constrained step
    bool allow_fully_constrained = false;
    double feas_tol = 1e-8;
    QpSettings qp;

    int constraint_horizon() const { return N - Ntilde; }

    /// Enforces N >= 2, 1 <= Ntilde <= N-1 (or Ntilde = 0 when opted in)
    /// and dimension consistency. Throws std::invalid_argument.
    void validate() const;
};

struct OpenLoopSolution {
    Eigen::MatrixXd inputs;   // m x n, optimal u(0..n-1)
    Eigen::MatrixXd states;   // nx x (n+1), forward-simulated from the inputs
    double value = 0.0;       // true stage-cost sum, constant offset included
    bool feasible = true;
    Eigen::VectorXd stacked;  // raw decision vector (warm-start payload)
};

/// Backward value-function family at a state: V_n for n = 0..N with the
/// first inputs mu_n and their stage costs. V_0 = 0 always.
struct ValueTable {
    int N = 0;
    int Ntilde = 0;
    Eigen::VectorXd state;
    Eigen::VectorXd values;             // size N+1, entry n = V_n(state)
    Eigen::MatrixXd first_inputs;       // m x N, column n-1 = mu_n(state)
    Eigen::VectorXd first_stage_costs;  // size N, entry n-1 = l(state, mu_n(state))
    std::vector<Eigen::VectorXd> input_sequences;  // per n, stacked optimum
};

/// Condensed QP templates for the whole tail family of one spec. The
/// quadratic term, constraint rows and their factorizations depend only on
/// the spec, not on the state, so a closed-loop run builds this once and
/// reuses it every step.
class CondensedFamily {
public:
    explicit CondensedFamily(const OcpSpec& spec);
    ~CondensedFamily();

    CondensedFamily(CondensedFamily&&) noexcept;
    CondensedFamily& operator=(CondensedFamily&&) noexcept;

    const OcpSpec& spec() const;

    /// Solves the horizon-n tail problem at state x (n = 1..N; n = N is the
    /// full problem). Throws InfeasibleOcp when the instance is infeasible
    /// or x violates the safe set beyond feas_tol.
    OpenLoopSolution solve(int n, const Eigen::VectorXd& x,
                           const Eigen::VectorXd* warm_start = nullptr) const;

    /// Membership of x in the constraint set X (plain half-spaces and
    /// barrier zero-superlevel sets), with tolerance.
    bool in_constraint_set(const Eigen::VectorXd& x, double tol) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot solve of the full partially constrained problem.
OpenLoopSolution solve_partially_constrained(const OcpSpec& spec, const Eigen::VectorXd& x0);

/// Solves all N+1 tail problems at x. An optional previous table at a
/// nearby state warm-starts each solve.
ValueTable value_family(const OcpSpec& spec, const Eigen::VectorXd& x,
                        const ValueTable* warm_start = nullptr);
ValueTable value_family(const CondensedFamily& family, const Eigen::VectorXd& x,
                        const ValueTable* warm_start = nullptr);

/// Value-iteration consistency defect |V_n(x) - V_{n-1}(f(x, mu_n(x))) -
/// l(x, mu_n(x))|. Diagnostic only; never part of the solve path.
double bellman_residual(const OcpSpec& spec, const Eigen::VectorXd& x, int n);
double bellman_residual(const CondensedFamily& family, const Eigen::VectorXd& x, int n);

/// The constraint set X of a spec as a BarrierSet (for invariance checks).
BarrierSet constraint_set(const OcpSpec& spec);

}  // namespace chmpc
