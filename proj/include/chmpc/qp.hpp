#pragma once

#include <Eigen/Core>

#include <optional>

namespace chmpc {

struct QpSettings {
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    double feas_tol = 1e-8;
    int max_iter = 50000;

    // ADMM internals
    double rho = 0.1;
    double sigma = 1e-6;
    double over_relax = 1.6;

    // Optional initial iterate (primal / dual for G z <= h).
    std::optional<Eigen::VectorXd> z0;
    std::optional<Eigen::VectorXd> y0;
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

struct QpSolution {
    Eigen::VectorXd z;       // primal point
    Eigen::VectorXd lambda;  // multipliers for G z <= h, >= 0 when Optimal
    double value = 0.0;      // 0.5 z'Hz + g'z (constant offsets live upstream)
    QpStatus status = QpStatus::MaxIterations;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool polished = false;
};

/// Dense strictly convex QP  min 0.5 z'Hz + g'z  s.t.  G z <= h.
/// H must be symmetric positive definite (min eigenvalue > 0, checked at
/// construction to tolerance 1e-10); q = 0 (no constraints) is allowed.
class QpProblem {
public:
    QpProblem(Eigen::MatrixXd H, Eigen::VectorXd g,
              Eigen::MatrixXd G, Eigen::VectorXd h);

    // Unconstrained convenience form.
    QpProblem(Eigen::MatrixXd H, Eigen::VectorXd g);

    Eigen::Index dim() const { return H_.rows(); }
    Eigen::Index num_constraints() const { return G_.rows(); }

    const Eigen::MatrixXd& H() const { return H_; }
    const Eigen::VectorXd& g() const { return g_; }
    const Eigen::MatrixXd& G() const { return G_; }
    const Eigen::VectorXd& h() const { return h_; }

    double objective(const Eigen::VectorXd& z) const;

    /// Same quadratic term and constraint rows with new linear/rhs data.
    /// Skips the definiteness re-check; condensed OCP instances share H and
    /// G across every state, only g and h move.
    QpProblem with_linear_terms(Eigen::VectorXd g, Eigen::VectorXd h) const;

private:
    struct Unchecked {};
    QpProblem(Unchecked, Eigen::MatrixXd H, Eigen::VectorXd g,
              Eigen::MatrixXd G, Eigen::VectorXd h);

    Eigen::MatrixXd H_;
    Eigen::VectorXd g_;
    Eigen::MatrixXd G_;
    Eigen::VectorXd h_;
};

/// Operator-splitting solve with over-relaxation and an active-set polish
/// step. Optimal status certifies the KKT conditions at the returned point
/// to the requested tolerances; MaxIterations returns the best iterate and
/// its residuals, never a silent wrong answer.
QpSolution solve_qp(const QpProblem& p, const QpSettings& settings = {});

/// Stationary point of 0.5 z'Hz + g'z subject to Aeq z = beq.
/// Throws SolverFailure if the KKT system is singular (callers treat that
/// active set as invalid).
Eigen::VectorXd solve_equality_kkt(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                                   const Eigen::MatrixXd& Aeq, const Eigen::VectorXd& beq);

}  // namespace chmpc
