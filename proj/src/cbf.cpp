#include "chmpc/cbf.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "chmpc/errors.hpp"

namespace chmpc {

AffineExpr AffineExpr::constant(const Eigen::VectorXd& v, Eigen::Index decision_dim) {
    return AffineExpr{Eigen::MatrixXd::Zero(v.size(), decision_dim), v};
}

AffineBarrier::AffineBarrier(Eigen::VectorXd a, double c, double gamma)
    : a_(std::move(a)), c_(c), gamma_(gamma) {
    if (a_.size() < 1) throw std::invalid_argument("AffineBarrier: empty normal vector");
    if (!(gamma_ > 0.0 && gamma_ <= 1.0))
        throw std::invalid_argument("AffineBarrier: gamma must be in (0, 1]");

    // b(x) = a'x + c is unbounded above along a unless a = 0, so a witness
    // of b >= 0 always exists except for constant negative barriers.
    const double an2 = a_.squaredNorm();
    if (an2 == 0.0) {
        if (c_ < 0.0) throw std::invalid_argument("AffineBarrier: empty safe set");
        witness_ = Eigen::VectorXd::Zero(a_.size());
    } else {
        witness_ = c_ >= 0.0 ? Eigen::VectorXd::Zero(a_.size())
                             : Eigen::VectorXd(-c_ / an2 * a_);
    }
}

double AffineBarrier::value(const Eigen::VectorXd& x) const {
    if (x.size() != a_.size())
        throw std::invalid_argument("AffineBarrier: state dimension mismatch");
    return a_.dot(x) + c_;
}

double evaluate(const AffineBarrier& b, const Eigen::VectorXd& x) {
    return b.value(x);
}

AffineConstraint step_constraint(const AffineBarrier& b,
                                 const AffineExpr& x_now,
                                 const AffineExpr& x_next) {
    if (x_now.M.cols() != x_next.M.cols())
        throw std::invalid_argument("step_constraint: decision dimension mismatch");
    if (x_now.w.size() != b.a().size() || x_next.w.size() != b.a().size())
        throw std::invalid_argument("step_constraint: state dimension mismatch");

    // b(x_next) - (1-gamma) b(x_now) >= 0, written as row z <= rhs.
    const double keep = 1.0 - b.gamma();
    Eigen::VectorXd row = -(x_next.M.transpose() * b.a() - keep * (x_now.M.transpose() * b.a()));
    const double rhs = b.a().dot(x_next.w) + b.c() - keep * (b.a().dot(x_now.w) + b.c());
    return AffineConstraint{std::move(row), rhs};
}

AffineConstraint step_constraint(const Barrier& b,
                                 const AffineExpr& x_now,
                                 const AffineExpr& x_next) {
    const auto* affine = dynamic_cast<const AffineBarrier*>(&b);
    if (!affine)
        throw UnsupportedBarrier(
            "step_constraint: only affine barriers condense to a half-space");
    return step_constraint(*affine, x_now, x_next);
}

double BarrierSet::min_margin(const Eigen::VectorXd& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& b : barriers) m = std::min(m, b.value(x));
    for (const auto& c : extra_affine) m = std::min(m, -c.violation(x));
    return m;
}

InvarianceReport verify_invariance(const BarrierSet& bs,
                                   const std::vector<Eigen::VectorXd>& trajectory,
                                   double feas_tol) {
    if (trajectory.empty())
        throw std::invalid_argument("verify_invariance: empty trajectory");
    const Eigen::Index T = static_cast<Eigen::Index>(trajectory.size());
    const Eigen::Index nb = static_cast<Eigen::Index>(bs.barriers.size());
    const Eigen::Index nc = nb + static_cast<Eigen::Index>(bs.extra_affine.size());

    InvarianceReport rep;
    rep.margins.resize(nc, T);
    rep.per_step_min.resize(T);
    rep.per_constraint_pass.assign(static_cast<size_t>(nc), true);
    rep.min_margin = std::numeric_limits<double>::infinity();

    for (Eigen::Index k = 0; k < T; ++k) {
        const Eigen::VectorXd& x = trajectory[static_cast<size_t>(k)];
        for (Eigen::Index j = 0; j < nc; ++j) {
            const double margin =
                j < nb ? bs.barriers[static_cast<size_t>(j)].value(x)
                       : -bs.extra_affine[static_cast<size_t>(j - nb)].violation(x);
            rep.margins(j, k) = margin;
            if (margin < -feas_tol) {
                rep.pass = false;
                rep.per_constraint_pass[static_cast<size_t>(j)] = false;
            }
            if (margin < rep.min_margin) {
                rep.min_margin = margin;
                rep.worst_step = k;
                rep.worst_constraint = j;
            }
        }
        rep.per_step_min(k) = nc > 0 ? rep.margins.col(k).minCoeff()
                                     : std::numeric_limits<double>::infinity();
    }
    return rep;
}

InvarianceReport verify_invariance(const BarrierSet& bs,
                                   const Eigen::MatrixXd& states_as_columns,
                                   double feas_tol) {
    std::vector<Eigen::VectorXd> traj;
    traj.reserve(static_cast<size_t>(states_as_columns.cols()));
    for (Eigen::Index k = 0; k < states_as_columns.cols(); ++k)
        traj.push_back(states_as_columns.col(k));
    return verify_invariance(bs, traj, feas_tol);
}

}  // namespace chmpc
