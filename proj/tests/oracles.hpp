// Test-only reference implementations. Deliberately independent of the
// library's solve paths: the QP oracle enumerates active sets with its own
// LU solves, the 1-D oracle minimizes over input grids.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

namespace oracles {

struct QpOracleResult {
    bool feasible = false;
    double value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd z;
};

// Tries every subset of constraint rows as the active set, solves the
// equality-constrained stationarity system directly, and keeps the best
// candidate that is primal feasible with nonnegative multipliers.
inline QpOracleResult enumerate_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                                   const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                                   double tol = 1e-9) {
    const Eigen::Index d = H.rows();
    const Eigen::Index q = G.rows();
    QpOracleResult best;

    for (unsigned mask = 0; mask < (1u << q); ++mask) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < q; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        const Eigen::Index na = static_cast<Eigen::Index>(idx.size());
        if (na > d) continue;

        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d + na, d + na);
        K.topLeftCorner(d, d) = H;
        Eigen::VectorXd rhs(d + na);
        rhs.head(d) = -g;
        for (Eigen::Index r = 0; r < na; ++r) {
            K.block(d + r, 0, 1, d) = G.row(idx[static_cast<size_t>(r)]);
            K.block(0, d + r, d, 1) = G.row(idx[static_cast<size_t>(r)]).transpose();
            rhs(d + r) = h(idx[static_cast<size_t>(r)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
        if (!lu.isInvertible()) continue;
        Eigen::VectorXd sol = lu.solve(rhs);
        Eigen::VectorXd z = sol.head(d);
        Eigen::VectorXd nu = sol.tail(na);

        if (na > 0 && nu.minCoeff() < -tol) continue;
        if (q > 0 && (G * z - h).maxCoeff() > tol) continue;

        const double value = 0.5 * z.dot(H * z) + g.dot(z);
        if (value < best.value) {
            best.feasible = true;
            best.value = value;
            best.z = std::move(z);
        }
    }
    return best;
}

struct RandomQp {
    Eigen::MatrixXd H, G;
    Eigen::VectorXd g, h;
    bool feasible_by_construction = true;
};

// Feasible instances get an interior point by construction; infeasible ones
// a contradictory pair of parallel rows with a gap.
inline RandomQp random_qp(std::mt19937& rng, bool make_infeasible) {
    std::uniform_int_distribution<int> dim_dist(1, 6);
    std::uniform_int_distribution<int> con_dist(1, 10);
    std::normal_distribution<double> normal(0.0, 1.0);

    const int d = dim_dist(rng);
    const int q = std::max(con_dist(rng), make_infeasible ? 2 : 1);

    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) M(i, j) = normal(rng);
    RandomQp out;
    out.H = M * M.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
    out.g.resize(d);
    for (int i = 0; i < d; ++i) out.g(i) = normal(rng);

    out.G.resize(q, d);
    out.h.resize(q);
    Eigen::VectorXd interior(d);
    for (int i = 0; i < d; ++i) interior(i) = normal(rng);
    for (int r = 0; r < q; ++r) {
        for (int c = 0; c < d; ++c) out.G(r, c) = normal(rng);
        out.h(r) = out.G.row(r).dot(interior) + std::abs(normal(rng)) + 0.1;
    }
    if (make_infeasible) {
        // a'z <= b and -a'z <= -b - gap
        out.G.row(1) = -out.G.row(0);
        out.h(0) = out.G.row(0).dot(interior);
        out.h(1) = -out.h(0) - (1.0 + std::abs(normal(rng)));
        out.feasible_by_construction = false;
    }
    return out;
}

// Brute-force two-step problem for the scalar system x+ = x + u with cost
// x^2 + u^2 and |u| <= 10: grid search over (u0, u1), refined around the
// best cell.
struct Scalar2StepResult {
    double value = 0.0;
    double u0 = 0.0;
    double u1 = 0.0;
};

inline Scalar2StepResult brute_force_two_step(double x, double u_limit = 10.0) {
    double c0 = 0.0, c1 = 0.0;
    double span = u_limit;
    Scalar2StepResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 9; ++round) {
        const int points = 41;
        for (int i = 0; i < points; ++i) {
            const double u0 =
                std::clamp(c0 - span + 2.0 * span * i / (points - 1), -u_limit, u_limit);
            const double x1 = x + u0;
            for (int j = 0; j < points; ++j) {
                const double u1 =
                    std::clamp(c1 - span + 2.0 * span * j / (points - 1), -u_limit, u_limit);
                const double value = x * x + u0 * u0 + x1 * x1 + u1 * u1;
                if (value < best.value) {
                    best.value = value;
                    best.u0 = u0;
                    best.u1 = u1;
                }
            }
        }
        c0 = best.u0;
        c1 = best.u1;
        span /= 6.0;
    }
    return best;
}

// One-step tail value V_1(x) = min_{|u|<=limit} x^2 + u^2.
inline double brute_force_one_step(double x, double u_limit = 10.0) {
    double c = 0.0, span = u_limit;
    double best = std::numeric_limits<double>::infinity();
    double best_u = 0.0;
    for (int round = 0; round < 9; ++round) {
        for (int i = 0; i < 81; ++i) {
            const double u = std::clamp(c - span + 2.0 * span * i / 80.0, -u_limit, u_limit);
            const double value = x * x + u * u;
            if (value < best) {
                best = value;
                best_u = u;
            }
        }
        c = best_u;
        span /= 6.0;
    }
    return best;
}

// Closed-loop cost of the receding-horizon controller for the scalar
// instance: at every state apply the first input of the two-step optimum.
inline double closed_loop_oracle(double x0, double eps, int max_steps) {
    double x = x0;
    double J = 0.0;
    for (int k = 0; k < max_steps; ++k) {
        const Scalar2StepResult sol = brute_force_two_step(x);
        const double l = x * x + sol.u0 * sol.u0;
        if (l < eps) break;
        J += l;
        x = x + sol.u0;
    }
    return J;
}

}  // namespace oracles
