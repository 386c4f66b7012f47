#include "chmpc/subopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "chmpc/errors.hpp"

namespace chmpc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

void check_certification_domain(double beta, int N, int Ntilde) {
    require(std::isfinite(beta) && beta > 0.0, "beta must be a positive real");
    require(N >= 2, "N must be >= 2");
    require(Ntilde >= 1 && Ntilde <= N - 1, "1 <= Ntilde <= N-1 required");
}

}  // namespace

namespace detail {

double alpha_from_length(double beta, int d) {
    // 1 - beta^{d+1} / (beta+1)^{d-1}. Plain pow is exact for the small
    // exponents the unit identities pin down; the log-space form takes over
    // when the powers leave the double range.
    const double num = std::pow(beta, d + 1);
    const double den = std::pow(beta + 1.0, d - 1);
    if (std::isfinite(num) && std::isfinite(den) && den > 0.0) {
        const double ratio = num / den;
        if (std::isfinite(ratio)) return 1.0 - ratio;
    }
    const double e = (d + 1) * std::log(beta) - (d - 1) * std::log1p(beta);
    return 1.0 - std::exp(e);
}

bool applicability_from_length(double beta, int d) {
    return alpha_from_length(beta, d) > 0.0;
}

int min_horizon_from_ratio(double beta, int Ntilde) {
    const double num = std::log1p(beta) + std::log(beta);
    const double den = std::log1p(beta) - std::log(beta);  // > 0 for all beta > 0
    const double raw = std::ceil(static_cast<double>(Ntilde) + num / den);
    const double floor_n = static_cast<double>(Ntilde) + 1.0;
    const double capped = std::min(std::max(raw, floor_n),
                                   static_cast<double>(std::numeric_limits<int>::max()));
    return static_cast<int>(capped);
}

}  // namespace detail

BetaCandidates beta_candidates(const ValueTable& table, double denom_tol) {
    require(table.N >= 1 && table.values.size() == table.N + 1,
            "beta_candidates: incomplete value table");
    require(table.Ntilde >= 0 && table.Ntilde <= table.N - 1,
            "beta_candidates: Ntilde out of range");
    const int d = table.N - table.Ntilde;

    BetaCandidates out;
    out.entries = Eigen::VectorXd::Constant(d + 1, kNaN);

    const double v_tail = table.values(table.Ntilde);
    if (v_tail >= denom_tol) {
        out.entries(0) = table.values(table.Ntilde + 1) / v_tail - 1.0;
    } else {
        ++out.skipped;
    }
    for (int k = 1; k <= d; ++k) {
        const int n = table.Ntilde + k;
        const double l = table.first_stage_costs(n - 1);
        if (l >= denom_tol) {
            out.entries(k) = table.values(n) / l - 1.0;
        } else {
            ++out.skipped;
        }
    }
    return out;
}

BetaRecord aggregate_beta(const std::vector<BetaCandidates>& columns, double beta_min) {
    require(beta_min > 0.0, "aggregate_beta: beta_min must be > 0");
    require(!columns.empty(), "aggregate_beta: no samples");
    const Eigen::Index rows = columns.front().entries.size();

    BetaRecord rec;
    rec.beta_min = beta_min;
    rec.matrix.resize(rows, static_cast<Eigen::Index>(columns.size()));
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (size_t c = 0; c < columns.size(); ++c) {
        require(columns[c].entries.size() == rows,
                "aggregate_beta: inconsistent candidate vectors");
        rec.matrix.col(static_cast<Eigen::Index>(c)) = columns[c].entries;
        rec.skipped += columns[c].skipped;
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double v = columns[c].entries(r);
            if (std::isnan(v)) continue;
            any = true;
            best = std::max(best, v);
        }
    }
    if (!any)
        throw DegenerateTrajectory(
            "aggregate_beta: every candidate skipped (trajectory at equilibrium?)");
    rec.beta = std::max(best, beta_min);
    return rec;
}

double alpha_of(double beta, int N, int Ntilde) {
    check_certification_domain(beta, N, Ntilde);
    return detail::alpha_from_length(beta, N - Ntilde);
}

bool applicability(double beta, int N, int Ntilde) {
    check_certification_domain(beta, N, Ntilde);
    return detail::applicability_from_length(beta, N - Ntilde);
}

int min_stabilizing_horizon(double beta, int Ntilde) {
    require(std::isfinite(beta) && beta > 0.0, "beta must be a positive real");
    require(Ntilde >= 1, "Ntilde must be >= 1");
    return detail::min_horizon_from_ratio(beta, Ntilde);
}

double eta_coefficient(double beta, int n, int Ntilde) {
    require(std::isfinite(beta) && beta > 0.0, "beta must be a positive real");
    require(n >= Ntilde + 1, "eta_coefficient: n must exceed Ntilde");
    const int k = n - Ntilde;
    const double num = std::pow(beta + 1.0, k - 1);
    const double den_term = std::pow(beta, k);
    if (std::isfinite(num) && std::isfinite(den_term)) {
        const double den = num + den_term;
        if (std::isfinite(den) && den > 0.0) return num / den;
    }
    const double e = k * std::log(beta) - (k - 1) * std::log1p(beta);
    return 1.0 / (1.0 + std::exp(e));
}

double decrease_margin(const CondensedFamily& family, const Eigen::VectorXd& x, double alpha) {
    const OcpSpec& spec = family.spec();
    OpenLoopSolution sol = family.solve(spec.N, x);
    const Eigen::VectorXd mu = sol.inputs.col(0);
    const double l = spec.cost.evaluate(x, mu);
    const Eigen::VectorXd next = spec.sys.step(x, mu);
    const double v_next = family.solve(spec.N, next).value;
    return sol.value - v_next - alpha * l;
}

double decrease_margin(const OcpSpec& spec, const Eigen::VectorXd& x, double alpha) {
    CondensedFamily family(spec);
    return decrease_margin(family, x, alpha);
}

Eigen::VectorXd value_chain_margins(const ValueTable& table, double beta) {
    require(std::isfinite(beta) && beta > 0.0, "beta must be a positive real");
    require(table.values.size() == table.N + 1, "value_chain_margins: incomplete table");
    const int d = table.N - table.Ntilde;
    require(d >= 1, "value_chain_margins: empty chain");

    Eigen::VectorXd margins(d);
    for (int n = table.Ntilde + 1; n <= table.N; ++n) {
        const double eta = eta_coefficient(beta, n, table.Ntilde);
        margins(n - table.Ntilde - 1) = table.values(n - 1) - eta * table.values(n);
    }
    return margins;
}

}  // namespace chmpc
