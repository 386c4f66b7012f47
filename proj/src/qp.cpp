#include "chmpc/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "chmpc/errors.hpp"

namespace chmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

struct KktCheck {
    bool ok = false;
    double stationarity = kInf;
    double primal = -kInf;  // max(Gz - h), negative means strictly feasible
    double complementarity = kInf;
};

KktCheck check_kkt(const QpProblem& p, const Eigen::VectorXd& z,
                   const Eigen::VectorXd& lambda, const QpSettings& s) {
    KktCheck c;
    Eigen::VectorXd stat = p.H() * z + p.g();
    if (p.num_constraints() > 0) stat += p.G().transpose() * lambda;
    c.stationarity = inf_norm(stat);

    double comp = 0.0;
    double prim = -kInf;
    if (p.num_constraints() > 0) {
        Eigen::VectorXd slack = p.G() * z - p.h();
        prim = slack.maxCoeff();
        comp = (lambda.array() * slack.array()).abs().maxCoeff();
        if (lambda.minCoeff() < -s.abs_tol) return c;
    }
    c.primal = prim;
    c.complementarity = comp;

    const double stat_scale = std::max({inf_norm(p.H() * z), inf_norm(p.g()), 1.0});
    c.ok = c.stationarity <= s.abs_tol + s.rel_tol * stat_scale &&
           prim <= s.feas_tol &&
           comp <= s.abs_tol + s.rel_tol * std::max(1.0, inf_norm(lambda));
    return c;
}

QpSolution finish(const QpProblem& p, Eigen::VectorXd z, Eigen::VectorXd lambda,
                  QpStatus status, int iterations, const KktCheck& c, bool polished) {
    QpSolution sol;
    sol.lambda = lambda.cwiseMax(0.0);
    sol.value = p.objective(z);
    sol.z = std::move(z);
    sol.status = status;
    sol.iterations = iterations;
    sol.primal_residual = std::max(0.0, c.primal);
    sol.dual_residual = c.stationarity;
    sol.polished = polished;
    return sol;
}

// Solves the equality-constrained KKT system on a candidate active set and
// grows/shrinks the set until the multipliers have the right sign and no
// inactive row is violated. Returns nullopt when it fails to settle; the
// ADMM loop then just keeps iterating.
std::optional<QpSolution> polish(const QpProblem& p, const Eigen::VectorXd& z_it,
                                 const Eigen::VectorXd& y_it, const QpSettings& s,
                                 int iterations_so_far) {
    const Eigen::Index d = p.dim();
    const Eigen::Index q = p.num_constraints();

    std::vector<char> active(static_cast<size_t>(q), 0);
    const double y_cut = 1e-8 * std::max(1.0, inf_norm(y_it));
    Eigen::VectorXd slack = p.h() - p.G() * z_it;
    const double slack_cut = 1e-6 * std::max(1.0, inf_norm(p.h()));
    for (Eigen::Index i = 0; i < q; ++i)
        active[static_cast<size_t>(i)] = (y_it(i) > y_cut || slack(i) < slack_cut) ? 1 : 0;

    for (int round = 0; round < 40; ++round) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < q; ++i)
            if (active[static_cast<size_t>(i)]) idx.push_back(i);
        const Eigen::Index na = static_cast<Eigen::Index>(idx.size());

        Eigen::VectorXd z;
        Eigen::VectorXd nu = Eigen::VectorXd::Zero(na);
        if (na == 0) {
            z = p.H().ldlt().solve(-p.g());
        } else {
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d + na, d + na);
            K.topLeftCorner(d, d) = p.H();
            for (Eigen::Index r = 0; r < na; ++r) {
                K.block(d + r, 0, 1, d) = p.G().row(idx[static_cast<size_t>(r)]);
                K.block(0, d + r, d, 1) = p.G().row(idx[static_cast<size_t>(r)]).transpose();
            }
            Eigen::VectorXd rhs(d + na);
            rhs.head(d) = -p.g();
            for (Eigen::Index r = 0; r < na; ++r) rhs(d + r) = p.h()(idx[static_cast<size_t>(r)]);

            Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
            if (!lu.isInvertible()) {
                // Degenerate set: drop the smallest-multiplier row and retry.
                if (na <= 1) return std::nullopt;
                Eigen::Index drop = 0;
                double best = kInf;
                for (Eigen::Index r = 0; r < na; ++r) {
                    const double yv = y_it(idx[static_cast<size_t>(r)]);
                    if (yv < best) { best = yv; drop = idx[static_cast<size_t>(r)]; }
                }
                active[static_cast<size_t>(drop)] = 0;
                continue;
            }
            Eigen::VectorXd sol = lu.solve(rhs);
            z = sol.head(d);
            nu = sol.tail(na);
        }

        bool changed = false;
        // Rows with negative multipliers leave the set.
        for (Eigen::Index r = 0; r < na; ++r) {
            if (nu(r) < -s.abs_tol) {
                active[static_cast<size_t>(idx[static_cast<size_t>(r)])] = 0;
                changed = true;
            }
        }
        if (!changed) {
            // Violated inactive rows join.
            Eigen::VectorXd viol = p.G() * z - p.h();
            for (Eigen::Index i = 0; i < q; ++i) {
                if (!active[static_cast<size_t>(i)] && viol(i) > s.feas_tol) {
                    active[static_cast<size_t>(i)] = 1;
                    changed = true;
                }
            }
        }
        if (changed) continue;

        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(q);
        for (Eigen::Index r = 0; r < na; ++r)
            lambda(idx[static_cast<size_t>(r)]) = std::max(0.0, nu(r));
        KktCheck c = check_kkt(p, z, lambda, s);
        if (!c.ok) return std::nullopt;
        return finish(p, std::move(z), std::move(lambda), QpStatus::Optimal,
                      iterations_so_far, c, true);
    }
    return std::nullopt;
}

bool primal_infeasibility_certificate(const QpProblem& p, const Eigen::VectorXd& dy) {
    const double norm = inf_norm(dy);
    if (norm < 1e-12) return false;
    if (dy.minCoeff() < -1e-10 * norm) return false;  // must be a nonnegative ray
    Eigen::VectorXd v = dy.cwiseMax(0.0) / norm;
    const double gscale = std::max(1.0, p.G().cwiseAbs().maxCoeff());
    const double hscale = std::max(1.0, inf_norm(p.h()));
    return inf_norm(p.G().transpose() * v) <= 1e-8 * gscale &&
           p.h().dot(v) <= -1e-8 * hscale;
}

}  // namespace

QpProblem::QpProblem(Eigen::MatrixXd H, Eigen::VectorXd g,
                     Eigen::MatrixXd G, Eigen::VectorXd h)
    : H_(std::move(H)), g_(std::move(g)), G_(std::move(G)), h_(std::move(h)) {
    if (H_.rows() != H_.cols()) throw std::invalid_argument("QpProblem: H must be square");
    if (g_.size() != H_.rows()) throw std::invalid_argument("QpProblem: g size mismatch");
    const double scale = std::max(1.0, H_.cwiseAbs().maxCoeff());
    if ((H_ - H_.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw std::invalid_argument("QpProblem: H must be symmetric");
    H_ = 0.5 * (H_ + H_.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 1e-10)
        throw std::invalid_argument("QpProblem: H must be positive definite");
    if (G_.size() == 0) G_.resize(0, H_.rows());
    if (G_.cols() != H_.rows()) throw std::invalid_argument("QpProblem: G width mismatch");
    if (h_.size() != G_.rows()) throw std::invalid_argument("QpProblem: h size mismatch");
}

QpProblem::QpProblem(Eigen::MatrixXd H, Eigen::VectorXd g)
    : QpProblem(std::move(H), std::move(g), Eigen::MatrixXd(), Eigen::VectorXd(0)) {}

QpProblem::QpProblem(Unchecked, Eigen::MatrixXd H, Eigen::VectorXd g,
                     Eigen::MatrixXd G, Eigen::VectorXd h)
    : H_(std::move(H)), g_(std::move(g)), G_(std::move(G)), h_(std::move(h)) {}

QpProblem QpProblem::with_linear_terms(Eigen::VectorXd g, Eigen::VectorXd h) const {
    if (g.size() != H_.rows()) throw std::invalid_argument("with_linear_terms: g size mismatch");
    if (h.size() != G_.rows()) throw std::invalid_argument("with_linear_terms: h size mismatch");
    return QpProblem(Unchecked{}, H_, std::move(g), G_, std::move(h));
}

double QpProblem::objective(const Eigen::VectorXd& z) const {
    return 0.5 * z.dot(H_ * z) + g_.dot(z);
}

QpSolution solve_qp(const QpProblem& p, const QpSettings& settings) {
    const Eigen::Index d = p.dim();
    const Eigen::Index q = p.num_constraints();

    Eigen::LLT<Eigen::MatrixXd> hllt(p.H());
    Eigen::VectorXd z_free = hllt.solve(-p.g());

    if (q == 0) {
        KktCheck c = check_kkt(p, z_free, Eigen::VectorXd(0), settings);
        return finish(p, std::move(z_free), Eigen::VectorXd::Zero(0),
                      QpStatus::Optimal, 0, c, false);
    }

    // The unconstrained minimizer is optimal whenever it is feasible, which
    // is the common case for OCP instances near the equilibrium.
    if ((p.G() * z_free - p.h()).maxCoeff() <= 0.0) {
        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(q);
        KktCheck c = check_kkt(p, z_free, lambda, settings);
        return finish(p, std::move(z_free), std::move(lambda),
                      QpStatus::Optimal, 0, c, false);
    }

    double rho = settings.rho;
    const double sigma = settings.sigma;
    const double relax = settings.over_relax;

    auto factor = [&](double r) {
        Eigen::MatrixXd M = p.H() + sigma * Eigen::MatrixXd::Identity(d, d) +
                            r * p.G().transpose() * p.G();
        return Eigen::LLT<Eigen::MatrixXd>(M);
    };
    Eigen::LLT<Eigen::MatrixXd> llt = factor(rho);

    Eigen::VectorXd z = settings.z0 && settings.z0->size() == d ? *settings.z0 : z_free;
    Eigen::VectorXd s = (p.G() * z).cwiseMin(p.h());
    Eigen::VectorXd y = settings.y0 && settings.y0->size() == q
                            ? Eigen::VectorXd(settings.y0->cwiseMax(0.0))
                            : Eigen::VectorXd(Eigen::VectorXd::Zero(q));

    Eigen::VectorXd y_window = y;
    int iter = 0;
    const int check_every = 25;

    while (iter < settings.max_iter) {
        ++iter;
        Eigen::VectorXd rhs = sigma * z - p.g() + p.G().transpose() * (rho * s - y);
        Eigen::VectorXd z_tilde = llt.solve(rhs);
        Eigen::VectorXd s_tilde = p.G() * z_tilde;

        z = relax * z_tilde + (1.0 - relax) * z;
        Eigen::VectorXd s_hat = relax * s_tilde + (1.0 - relax) * s;
        Eigen::VectorXd s_next = (s_hat + y / rho).cwiseMin(p.h());
        y += rho * (s_hat - s_next);
        s = std::move(s_next);

        if (iter % check_every != 0) continue;

        Eigen::VectorXd gz = p.G() * z;
        const double r_prim = inf_norm(gz - s);
        Eigen::VectorXd gty = p.G().transpose() * y;
        Eigen::VectorXd hz = p.H() * z;
        const double r_dual = inf_norm(hz + p.g() + gty);

        const double prim_scale = std::max({inf_norm(gz), inf_norm(s), 1.0});
        const double dual_scale = std::max({inf_norm(hz), inf_norm(gty), inf_norm(p.g()), 1.0});

        // Any time the iterate is in the neighborhood of a solution, try to
        // finish exactly on the identified active set.
        if (r_prim <= 1e-4 * prim_scale && r_dual <= 1e-3 * dual_scale) {
            if (auto sol = polish(p, z, y, settings, iter)) return *sol;
        }

        if (r_prim <= settings.abs_tol + settings.rel_tol * prim_scale &&
            r_dual <= settings.abs_tol + settings.rel_tol * dual_scale) {
            Eigen::VectorXd lambda = y.cwiseMax(0.0);
            KktCheck c = check_kkt(p, z, lambda, settings);
            if (c.ok) return finish(p, z, std::move(lambda), QpStatus::Optimal, iter, c, false);
        }

        if (primal_infeasibility_certificate(p, y - y_window)) {
            KktCheck c;
            c.stationarity = r_dual;
            c.primal = (gz - p.h()).maxCoeff();
            return finish(p, z, y, QpStatus::Infeasible, iter, c, false);
        }
        y_window = y;

        // Residual balancing.
        const double ratio = (r_prim / prim_scale) / std::max(r_dual / dual_scale, 1e-16);
        if (ratio > 25.0 || ratio < 0.04) {
            rho = std::clamp(rho * std::sqrt(ratio), 1e-6, 1e6);
            llt = factor(rho);
        }
    }

    if (auto sol = polish(p, z, y, settings, iter)) return *sol;
    Eigen::VectorXd lambda = y.cwiseMax(0.0);
    KktCheck c = check_kkt(p, z, lambda, settings);
    QpStatus status = c.ok ? QpStatus::Optimal : QpStatus::MaxIterations;
    return finish(p, z, std::move(lambda), status, iter, c, false);
}

Eigen::VectorXd solve_equality_kkt(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                                   const Eigen::MatrixXd& Aeq, const Eigen::VectorXd& beq) {
    const Eigen::Index d = H.rows();
    const Eigen::Index ne = Aeq.rows();
    if (H.cols() != d) throw std::invalid_argument("solve_equality_kkt: H must be square");
    if (g.size() != d) throw std::invalid_argument("solve_equality_kkt: g size mismatch");
    if (ne > 0 && Aeq.cols() != d)
        throw std::invalid_argument("solve_equality_kkt: Aeq width mismatch");
    if (beq.size() != ne) throw std::invalid_argument("solve_equality_kkt: beq size mismatch");

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d + ne, d + ne);
    K.topLeftCorner(d, d) = H;
    if (ne > 0) {
        K.bottomLeftCorner(ne, d) = Aeq;
        K.topRightCorner(d, ne) = Aeq.transpose();
    }
    Eigen::VectorXd rhs(d + ne);
    rhs.head(d) = -g;
    rhs.tail(ne) = beq;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) throw SolverFailure("solve_equality_kkt: singular KKT system");
    Eigen::VectorXd sol = lu.solve(rhs);
    return sol.head(d);
}

}  // namespace chmpc
