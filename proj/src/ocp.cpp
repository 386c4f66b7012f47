#include "chmpc/ocp.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "chmpc/errors.hpp"

namespace chmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

InputBox InputBox::unbounded(Eigen::Index m) {
    return InputBox{Eigen::VectorXd::Constant(m, -kInf), Eigen::VectorXd::Constant(m, kInf)};
}

InputBox InputBox::symmetric(Eigen::Index m, double limit) {
    return InputBox{Eigen::VectorXd::Constant(m, -limit), Eigen::VectorXd::Constant(m, limit)};
}

void OcpSpec::validate() const {
    const Eigen::Index nx = sys.state_dim();
    const Eigen::Index m = sys.input_dim();
    require(cost.Q().rows() == nx, "OcpSpec: Q dimension does not match the system");
    require(cost.R().rows() == m, "OcpSpec: R dimension does not match the system");
    require(N >= 2, "OcpSpec: N must be >= 2");
    if (Ntilde == 0) {
        require(allow_fully_constrained,
                "OcpSpec: Ntilde = 0 (fully constrained) must be opted into explicitly");
    } else {
        require(Ntilde >= 1 && Ntilde <= N - 1, "OcpSpec: 1 <= Ntilde <= N-1 required");
    }
    require(input_box.lower.size() == m && input_box.upper.size() == m,
            "OcpSpec: input box dimension mismatch");
    for (Eigen::Index r = 0; r < m; ++r)
        require(input_box.lower(r) <= input_box.upper(r), "OcpSpec: empty input box");
    for (const auto& c : state_constraints)
        require(c.a.size() == nx, "OcpSpec: state constraint dimension mismatch");
    for (const auto& b : cbf_set)
        require(b.a().size() == nx, "OcpSpec: barrier dimension mismatch");
    require(feas_tol > 0.0, "OcpSpec: feas_tol must be > 0");
}

BarrierSet constraint_set(const OcpSpec& spec) {
    return BarrierSet{spec.cbf_set, spec.state_constraints};
}

struct CondensedFamily::Impl {
    OcpSpec spec;
    Eigen::Index nx = 0;
    Eigen::Index m = 0;

    std::vector<Eigen::MatrixXd> Apow;  // A^i, i = 0..N
    std::vector<Eigen::MatrixXd> AB;    // A^i B, i = 0..N-1

    // One condensed template per horizon n = 1..N. The quadratic term,
    // constraint rows and the h(x) = h_const + Hx x decomposition are all
    // state independent.
    struct Template {
        int n = 0;
        Eigen::Index dim = 0;
        std::vector<Eigen::MatrixXd> Gamma;  // nx x dim, t = 0..n
        std::optional<QpProblem> base;       // H, rows; placeholder g, h
        Eigen::MatrixXd Sg;                  // g(x) = Sg x
        Eigen::MatrixXd So;                  // offset(x) = x' So x
        Eigen::VectorXd h_const;
        Eigen::MatrixXd Hx;                  // h(x) = h_const + Hx x (+ clamp slack)
        std::vector<int> plain_source;       // per row: state-constraint index or -1
        int state_rows_from = 0;             // first non-box row
    };
    std::vector<Template> templates;  // index n-1

    explicit Impl(const OcpSpec& s) : spec(s) {
        spec.validate();
        nx = spec.sys.state_dim();
        m = spec.sys.input_dim();

        Apow.resize(static_cast<size_t>(spec.N) + 1);
        Apow[0] = Eigen::MatrixXd::Identity(nx, nx);
        for (int i = 1; i <= spec.N; ++i) Apow[i] = spec.sys.A() * Apow[i - 1];
        AB.resize(static_cast<size_t>(spec.N));
        for (int i = 0; i < spec.N; ++i) AB[i] = Apow[i] * spec.sys.B();

        templates.reserve(static_cast<size_t>(spec.N));
        for (int n = 1; n <= spec.N; ++n) templates.push_back(build(n));
    }

    Template build(int n) const {
        Template t;
        t.n = n;
        t.dim = static_cast<Eigen::Index>(n) * m;

        t.Gamma.resize(static_cast<size_t>(n) + 1, Eigen::MatrixXd::Zero(nx, t.dim));
        for (int s = 1; s <= n; ++s)
            for (int j = 0; j < s; ++j)
                t.Gamma[s].middleCols(static_cast<Eigen::Index>(j) * m, m) = AB[s - 1 - j];

        // Cost: sum_{i=0}^{n-1} x_i' Q x_i + u_i' R u_i with x_i = A^i x + Gamma_i U.
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(t.dim, t.dim);
        for (int j = 0; j < n; ++j)
            H.block(static_cast<Eigen::Index>(j) * m, static_cast<Eigen::Index>(j) * m, m, m) =
                spec.cost.R();
        t.Sg = Eigen::MatrixXd::Zero(t.dim, nx);
        t.So = Eigen::MatrixXd::Zero(nx, nx);
        for (int i = 0; i < n; ++i) {
            t.So += Apow[i].transpose() * spec.cost.Q() * Apow[i];
            if (i >= 1) {
                Eigen::MatrixXd QG = spec.cost.Q() * t.Gamma[i];
                H += t.Gamma[i].transpose() * QG;
                t.Sg += 2.0 * t.Gamma[i].transpose() * (spec.cost.Q() * Apow[i]);
            }
        }
        H *= 2.0;

        // Rows: input box on every step, then (for n >= Ntilde+1) the state
        // half-spaces and barrier decay constraints on the first n - Ntilde
        // successor states.
        std::vector<Eigen::VectorXd> rows;
        std::vector<double> consts;
        std::vector<Eigen::VectorXd> hx_rows;
        std::vector<int> sources;
        const Eigen::VectorXd zero_x = Eigen::VectorXd::Zero(nx);

        for (int j = 0; j < n; ++j) {
            for (Eigen::Index r = 0; r < m; ++r) {
                const Eigen::Index col = static_cast<Eigen::Index>(j) * m + r;
                if (std::isfinite(spec.input_box.upper(r))) {
                    Eigen::VectorXd row = Eigen::VectorXd::Zero(t.dim);
                    row(col) = 1.0;
                    rows.push_back(std::move(row));
                    consts.push_back(spec.input_box.upper(r));
                    hx_rows.push_back(zero_x);
                    sources.push_back(-1);
                }
                if (std::isfinite(spec.input_box.lower(r))) {
                    Eigen::VectorXd row = Eigen::VectorXd::Zero(t.dim);
                    row(col) = -1.0;
                    rows.push_back(std::move(row));
                    consts.push_back(-spec.input_box.lower(r));
                    hx_rows.push_back(zero_x);
                    sources.push_back(-1);
                }
            }
        }
        t.state_rows_from = static_cast<int>(rows.size());

        const int constrained = n - spec.Ntilde;  // successor states x_1..x_constrained
        if (constrained >= 1) {
            for (int s = 1; s <= constrained; ++s) {
                for (size_t ci = 0; ci < spec.state_constraints.size(); ++ci) {
                    const auto& c = spec.state_constraints[ci];
                    rows.push_back(t.Gamma[s].transpose() * c.a);
                    consts.push_back(c.b);
                    hx_rows.push_back(-(Apow[s].transpose() * c.a));
                    sources.push_back(static_cast<int>(ci));
                }
                for (const auto& b : spec.cbf_set) {
                    // Row and constant term from the barrier's own half-space
                    // generator; the x coefficient is the A-power part of the
                    // same expression.
                    AffineExpr prev{t.Gamma[s - 1], zero_x};
                    AffineExpr next{t.Gamma[s], zero_x};
                    AffineConstraint hs = step_constraint(b, prev, next);
                    rows.push_back(std::move(hs.a));
                    consts.push_back(hs.b);
                    hx_rows.push_back(Apow[s].transpose() * b.a() -
                                      (1.0 - b.gamma()) * (Apow[s - 1].transpose() * b.a()));
                    sources.push_back(-1);
                }
            }
        }

        const Eigen::Index q = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd G(q, t.dim);
        t.h_const.resize(q);
        t.Hx.resize(q, nx);
        for (Eigen::Index i = 0; i < q; ++i) {
            G.row(i) = rows[static_cast<size_t>(i)];
            t.h_const(i) = consts[static_cast<size_t>(i)];
            t.Hx.row(i) = hx_rows[static_cast<size_t>(i)];
        }
        t.plain_source = std::move(sources);
        t.base.emplace(std::move(H), Eigen::VectorXd::Zero(t.dim), std::move(G), t.h_const);
        return t;
    }

    // Membership of x in X with per-constraint slack for marginal
    // violations. Violations beyond feas_tol are misuse of the invariance
    // assumption and raise InfeasibleOcp.
    Eigen::VectorXd membership_slack(const Eigen::VectorXd& x) const {
        Eigen::VectorXd slack = Eigen::VectorXd::Zero(
            static_cast<Eigen::Index>(spec.state_constraints.size()));
        for (size_t ci = 0; ci < spec.state_constraints.size(); ++ci) {
            const double v = spec.state_constraints[ci].violation(x);
            if (v > spec.feas_tol) {
                std::ostringstream os;
                os << "state violates constraint " << ci << " by " << v;
                throw InfeasibleOcp(os.str(), x);
            }
            slack(static_cast<Eigen::Index>(ci)) = std::max(0.0, v);
        }
        for (size_t bi = 0; bi < spec.cbf_set.size(); ++bi) {
            if (spec.cbf_set[bi].value(x) < -spec.feas_tol) {
                std::ostringstream os;
                os << "state outside barrier " << bi << " zero-superlevel set";
                throw InfeasibleOcp(os.str(), x);
            }
        }
        return slack;
    }
};

CondensedFamily::CondensedFamily(const OcpSpec& spec) : impl_(std::make_unique<Impl>(spec)) {}
CondensedFamily::~CondensedFamily() = default;
CondensedFamily::CondensedFamily(CondensedFamily&&) noexcept = default;
CondensedFamily& CondensedFamily::operator=(CondensedFamily&&) noexcept = default;

const OcpSpec& CondensedFamily::spec() const { return impl_->spec; }

bool CondensedFamily::in_constraint_set(const Eigen::VectorXd& x, double tol) const {
    for (const auto& c : impl_->spec.state_constraints)
        if (c.violation(x) > tol) return false;
    for (const auto& b : impl_->spec.cbf_set)
        if (b.value(x) < -tol) return false;
    return true;
}

OpenLoopSolution CondensedFamily::solve(int n, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd* warm_start) const {
    require(n >= 1 && n <= impl_->spec.N, "CondensedFamily::solve: horizon out of range");
    require(x.size() == impl_->nx, "CondensedFamily::solve: state dimension mismatch");
    const auto& t = impl_->templates[static_cast<size_t>(n - 1)];

    Eigen::VectorXd h = t.h_const + t.Hx * x;
    if (n >= impl_->spec.Ntilde + 1) {
        Eigen::VectorXd slack = impl_->membership_slack(x);
        for (size_t i = static_cast<size_t>(t.state_rows_from); i < t.plain_source.size(); ++i)
            if (t.plain_source[i] >= 0)
                h(static_cast<Eigen::Index>(i)) += slack(t.plain_source[i]);
    }

    QpProblem qp = t.base->with_linear_terms(t.Sg * x, std::move(h));
    QpSettings settings = impl_->spec.qp;
    if (warm_start && warm_start->size() == t.dim) settings.z0 = *warm_start;

    QpSolution sol = solve_qp(qp, settings);
    if (sol.status == QpStatus::Infeasible)
        throw InfeasibleOcp("tail problem infeasible at horizon " + std::to_string(n), x);
    if (sol.status == QpStatus::MaxIterations) {
        std::ostringstream os;
        os << "QP iteration limit at horizon " << n
           << " (primal " << sol.primal_residual << ", dual " << sol.dual_residual << ")";
        throw SolverFailure(os.str());
    }

    OpenLoopSolution out;
    out.stacked = sol.z;
    out.inputs.resize(impl_->m, n);
    for (int j = 0; j < n; ++j)
        out.inputs.col(j) = sol.z.segment(static_cast<Eigen::Index>(j) * impl_->m, impl_->m);
    out.states.resize(impl_->nx, n + 1);
    out.states.col(0) = x;
    for (int j = 0; j < n; ++j)
        out.states.col(j + 1) = impl_->spec.sys.step(out.states.col(j), out.inputs.col(j));
    out.value = sol.value + x.dot(t.So * x);
    out.feasible = true;
    return out;
}

OpenLoopSolution solve_partially_constrained(const OcpSpec& spec, const Eigen::VectorXd& x0) {
    CondensedFamily family(spec);
    return family.solve(spec.N, x0);
}

ValueTable value_family(const CondensedFamily& family, const Eigen::VectorXd& x,
                        const ValueTable* warm_start) {
    const OcpSpec& spec = family.spec();
    const Eigen::Index m = spec.sys.input_dim();

    ValueTable table;
    table.N = spec.N;
    table.Ntilde = spec.Ntilde;
    table.state = x;
    table.values = Eigen::VectorXd::Zero(spec.N + 1);
    table.first_inputs.resize(m, spec.N);
    table.first_stage_costs.resize(spec.N);
    table.input_sequences.resize(static_cast<size_t>(spec.N));

    for (int n = 1; n <= spec.N; ++n) {
        const Eigen::VectorXd* warm = nullptr;
        if (warm_start && static_cast<int>(warm_start->input_sequences.size()) >= n)
            warm = &warm_start->input_sequences[static_cast<size_t>(n - 1)];
        OpenLoopSolution sol = family.solve(n, x, warm);
        table.values(n) = sol.value;
        table.first_inputs.col(n - 1) = sol.inputs.col(0);
        table.first_stage_costs(n - 1) = spec.cost.evaluate(x, sol.inputs.col(0));
        table.input_sequences[static_cast<size_t>(n - 1)] = std::move(sol.stacked);
    }
    return table;
}

ValueTable value_family(const OcpSpec& spec, const Eigen::VectorXd& x,
                        const ValueTable* warm_start) {
    CondensedFamily family(spec);
    return value_family(family, x, warm_start);
}

double bellman_residual(const CondensedFamily& family, const Eigen::VectorXd& x, int n) {
    const OcpSpec& spec = family.spec();
    require(n >= 1 && n <= spec.N, "bellman_residual: 1 <= n <= N required");

    OpenLoopSolution sol = family.solve(n, x);
    const Eigen::VectorXd mu = sol.inputs.col(0);
    const double l = spec.cost.evaluate(x, mu);
    const Eigen::VectorXd next = spec.sys.step(x, mu);
    const double v_prev = n == 1 ? 0.0 : family.solve(n - 1, next).value;
    return std::abs(sol.value - v_prev - l);
}

double bellman_residual(const OcpSpec& spec, const Eigen::VectorXd& x, int n) {
    CondensedFamily family(spec);
    return bellman_residual(family, x, n);
}

}  // namespace chmpc
