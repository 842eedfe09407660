#include "support.hpp"

#include "jdlv/adjoint.hpp"
#include "jdlv/errors.hpp"
#include "jdlv/forward_pide.hpp"
#include "jdlv/rng.hpp"
#include "jdlv/workflows.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>

using namespace jdlv;

namespace {

// Residual of the Crank-Nicolson steps written out directly from the scheme:
// F_i = (I - dtau/2 L_i) u^i - (I + dtau/2 L_{i-1}) u^{i-1} - M(u^{i-1}) on interior columns.
struct DenseScheme {
    Grid g;
    MarketParams mkt;
    WeightMode mode;

    int interior() const { return g.nodes() - 2; }
    int unknowns() const { return g.steps() * interior(); }

    double row_value(const Surface& u, int i, int m) const {
        return g.contains_j(m) ? u(i, g.col(m)) : payoff(g.y(m));
    }

    Eigen::VectorXd F(const Surface& u, const Surface& a, const std::vector<double>& phi) const {
        const double eta = g.eta();
        const double beta = g.beta();
        const double r = mkt.r;
        const int n = g.nodes();
        Eigen::VectorXd out(unknowns());
        for (int i = 1; i <= g.steps(); ++i) {
            for (int c = 1; c < n - 1; ++c) {
                const double ai = a(i, c);
                const double ap = a(i - 1, c);
                const double implicit = (1.0 + eta * ai) * u(i, c) + (-0.5 * eta * ai - 0.25 * beta * (ai + r)) * u(i, c - 1) +
                                        (-0.5 * eta * ai + 0.25 * beta * (ai + r)) * u(i, c + 1);
                const double explicit_part = u(i - 1, c) +
                                             0.5 * eta * ap * (u(i - 1, c + 1) - 2.0 * u(i - 1, c) + u(i - 1, c - 1)) -
                                             0.25 * beta * (ap + r) * (u(i - 1, c + 1) - u(i - 1, c - 1));
                const int j = c + g.j_lo();
                double jump = 0.0;
                for (int k = g.j_lo(); k <= g.j_hi(); ++k) {
                    const double wk = phi[g.col(k)] * (mode == WeightMode::paper ? std::exp(g.y(k)) : 1.0);
                    if (wk == 0.0) continue;
                    const int m = j - k;
                    const double up = row_value(u, i - 1, m + 1);
                    const double mid = row_value(u, i - 1, m);
                    const double dn = row_value(u, i - 1, m - 1);
                    jump += wk * (beta * (up - 2.0 * mid + dn) - 0.5 * g.dtau() * (up - dn));
                }
                out[(i - 1) * interior() + c - 1] = implicit - explicit_part - jump;
            }
        }
        return out;
    }

    // F is affine in the interior unknowns, so unit differences give K exactly.
    Eigen::MatrixXd K(const Surface& u, const Surface& a, const std::vector<double>& phi) const {
        const Eigen::VectorXd f0 = F(u, a, phi);
        Eigen::MatrixXd k(unknowns(), unknowns());
        Surface v = u;
        for (int i = 1; i <= g.steps(); ++i)
            for (int c = 1; c < g.nodes() - 1; ++c) {
                v(i, c) += 1.0;
                k.col((i - 1) * interior() + c - 1) = F(v, a, phi) - f0;
                v(i, c) = u(i, c);
            }
        return k;
    }
};

struct Problem {
    Grid g;
    MarketParams mkt;
    VolSurface a;
    TailFunction phi;
    Residual res;
};

Problem make_problem(int steps, int J, bool jumps) {
    Problem p{Grid::symmetric(0.5, steps, 1.0, J), MarketParams(0.02, 1.0), {}, {}, {}};
    const Grid& g = p.g;
    p.a = VolSurface::constant(g, 0.05);
    for (int i = 0; i < g.levels(); ++i)
        for (int c = 0; c < g.nodes(); ++c) p.a.a(i, c) += 0.01 * std::sin(3.0 * g.y_at_col(c) + 1.0) * std::cos(2.0 * g.tau(i));
    p.phi = TailFunction::zeros(g);
    if (jumps)
        for (int c = 0; c < g.nodes(); ++c)
            if (c != g.zero_col()) p.phi.phi[c] = 0.05 * std::exp(-std::abs(g.y_at_col(c)));
    int s = 0;
    for (int i = 2; i <= steps; i += 2)
        for (int j = -J / 2; j <= J / 2; ++j, ++s) p.res.nodes.push_back({i, j, 0.01 * std::sin(1.7 * s)});
    return p;
}

}  // namespace

TEST_CASE("zero residual gives a zero adjoint and zero gradients") {
    const Problem p = make_problem(10, 10, true);
    Residual zero;
    for (ResidualNode q : p.res.nodes) zero.nodes.push_back({q.i, q.j, 0.0});
    const PriceSurface u = solve_forward(p.a, p.phi, p.g, p.mkt);
    for (AdjointMode mode : {AdjointMode::discrete, AdjointMode::continuous}) {
        const AdjointSurface w = solve_adjoint(p.a, p.phi, zero, p.g, p.mkt, {}, mode);
        for (double v : w.w.values()) CHECK(v == 0.0);
        const Surface gv = grad_vol(u, w, p.g);
        for (double v : gv.values()) CHECK(v == 0.0);
        for (double v : grad_tail(u, w, p.g)) CHECK(v == 0.0);
    }
}

TEST_CASE("discrete adjoint equals the transposed dense propagator on a 10x21 grid") {
    for (WeightMode mode : {WeightMode::plain, WeightMode::paper}) {
        CAPTURE(to_string(mode));
        const Problem p = make_problem(10, 10, true);
        const Grid& g = p.g;
        const SchemeOptions so{mode};
        const DenseScheme dense{g, p.mkt, mode};
        const PriceSurface u = solve_forward(p.a, p.phi, g, p.mkt, so);

        // The forward march satisfies the scheme written out independently.
        CHECK(dense.F(u.u, p.a.a, p.phi.phi).cwiseAbs().maxCoeff() < 1e-13);

        const Eigen::MatrixXd K = dense.K(u.u, p.a.a, p.phi.phi);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dense.unknowns());
        for (const ResidualNode& q : p.res.nodes) rhs[(q.i - 1) * dense.interior() + g.col(q.j) - 1] = q.value;
        const Eigen::VectorXd lambda = K.transpose().fullPivLu().solve(rhs);

        const AdjointSurface w = solve_adjoint(p.a, p.phi, p.res, g, p.mkt, so);
        double worst = 0.0;
        for (int i = 1; i <= g.steps(); ++i)
            for (int c = 1; c < g.nodes() - 1; ++c)
                worst = std::max(worst, std::abs(w.w(i, c) - lambda[(i - 1) * dense.interior() + c - 1]));
        CHECK(worst < 1e-10);

        // dJ/dtheta = -lambda^T dF/dtheta, with dF/dtheta exact since F is affine in a and phi.
        const Eigen::VectorXd f0 = dense.F(u.u, p.a.a, p.phi.phi);
        const Surface gv = grad_vol(u, w, g);
        Surface a1 = p.a.a;
        double worst_vol = 0.0;
        double scale_vol = 0.0;
        for (int i = 0; i < g.levels(); ++i)
            for (int c = 1; c < g.nodes() - 1; ++c) {
                a1(i, c) += 1.0;
                const double ref = -lambda.dot(dense.F(u.u, a1, p.phi.phi) - f0);
                a1(i, c) = p.a.a(i, c);
                worst_vol = std::max(worst_vol, std::abs(gv(i, c) - ref));
                scale_vol = std::max(scale_vol, std::abs(ref));
            }
        CHECK(worst_vol < 1e-10 * scale_vol);

        const std::vector<double> gt = grad_tail(u, w, g, so);
        std::vector<double> phi1 = p.phi.phi;
        double worst_tail = 0.0;
        double scale_tail = 0.0;
        for (int c = 0; c < g.nodes(); ++c) {
            if (c == g.zero_col()) continue;
            phi1[c] += 1.0;
            const double ref = -lambda.dot(dense.F(u.u, p.a.a, phi1) - f0);
            phi1[c] = p.phi.phi[c];
            worst_tail = std::max(worst_tail, std::abs(gt[c] - ref));
            scale_tail = std::max(scale_tail, std::abs(ref));
        }
        CHECK(worst_tail < 1e-10 * scale_tail);
    }
}

TEST_CASE("tangent and adjoint are transposes") {
    const Problem p = make_problem(10, 10, true);
    const Grid& g = p.g;
    const PriceSurface u = solve_forward(p.a, p.phi, g, p.mkt);
    const AdjointSurface w = solve_adjoint(p.a, p.phi, p.res, g, p.mkt);
    const Surface gv = grad_vol(u, w, g);
    const std::vector<double> gt = grad_tail(u, w, g);
    CounterRng rng(11, 0);
    for (int trial = 0; trial < 3; ++trial) {
        Surface da(g.levels(), g.nodes());
        std::vector<double> dphi(g.nodes(), 0.0);
        double rhs = 0.0;
        for (int i = 0; i < g.levels(); ++i)
            for (int c = 1; c < g.nodes() - 1; ++c) {
                da(i, c) = rng.uniform() - 0.5;
                rhs += gv(i, c) * da(i, c);
            }
        for (int c = 0; c < g.nodes(); ++c)
            if (c != g.zero_col()) {
                dphi[c] = rng.uniform() - 0.5;
                rhs += gt[c] * dphi[c];
            }
        const Surface v = solve_tangent(p.a, p.phi, u, da, dphi, g, p.mkt);
        double lhs = 0.0;
        for (const ResidualNode& q : p.res.nodes) lhs += q.value * v(q.i, g.col(q.j));
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
    }
}

TEST_CASE("adjoint of a single positive residual is nonnegative without jumps") {
    const Grid g = Grid::symmetric(1.0, 20, 1.0, 10);
    Residual res;
    res.nodes.push_back({20, 0, 1.0});
    const AdjointSurface w = solve_adjoint(VolSurface::constant(g, 0.02), TailFunction::zeros(g), res, g, MarketParams());
    for (double v : w.w.values()) CHECK(v >= -1e-12);
}

TEST_CASE("vol gradient of a single quote lives in its causal cone") {
    const Grid g = Grid::symmetric(1.0, 20, 1.0, 20);
    const VolSurface a = VolSurface::constant(g, 0.02);
    const TailFunction phi = TailFunction::zeros(g);
    const PriceSurface u = solve_forward(a, phi, g, MarketParams());
    Residual res;
    res.nodes.push_back({10, 0, 0.01});
    const Surface gv = grad_vol(u, solve_adjoint(a, phi, res, g, MarketParams()), g);
    double inside = 0.0;
    double total = 0.0;
    for (int i = 0; i < g.levels(); ++i)
        for (int c = 0; c < g.nodes(); ++c) {
            total += std::abs(gv(i, c));
            if (i <= 10) inside += std::abs(gv(i, c));
        }
    CHECK(total > 0.0);
    CHECK(inside >= 0.9 * total);
}

TEST_CASE("discrete gradients pass central finite differences on a 20x41 grid") {
    for (WeightMode mode : {WeightMode::plain, WeightMode::paper}) {
        CAPTURE(to_string(mode));
        const GradientCheck check = check_gradients(20, 41, 5, 20240601, SchemeOptions{mode});
        for (double e : check.vol_errors) CHECK(e < 1e-4);
        for (double e : check.tail_errors) CHECK(e < 1e-4);
        CHECK(check.passed);
    }
}

namespace {

// Relative error of the continuous-mode tail gradient along smooth directions, grid refined by f.
std::vector<double> continuous_tail_errors(int f) {
    const Grid g = Grid::symmetric(0.5, 20 * f, 1.0, 20 * f);
    const MarketParams mkt(0.02, 1.0);
    VolSurface a = VolSurface::constant(g, 0.05);
    for (int i = 0; i < g.levels(); ++i)
        for (int c = 0; c < g.nodes(); ++c) a.a(i, c) += 0.01 * std::sin(3.0 * g.y_at_col(c) + 1.0) * std::cos(2.0 * g.tau(i));
    TailFunction phi = TailFunction::zeros(g);
    for (int c = 0; c < g.nodes(); ++c)
        if (c != g.zero_col()) phi.phi[c] = 0.05 * std::exp(-std::abs(g.y_at_col(c)));
    const PriceSurface u = solve_forward(a, phi, g, mkt);
    Residual res;
    for (int i = 2 * f; i <= 20 * f; i += 2 * f)
        for (int j = -10 * f; j <= 10 * f; j += f) res.nodes.push_back({i, j, 0.02});
    auto objective = [&](const TailFunction& p) {
        const PriceSurface v = solve_forward(a, p, g, mkt);
        double s = 0.0;
        for (const ResidualNode& q : res.nodes) {
            const double r = v.u(q.i, g.col(q.j)) - u.u(q.i, g.col(q.j)) + q.value;
            s += 0.5 * r * r;
        }
        return s;
    };
    const std::vector<double> gt = grad_tail(u, solve_adjoint(a, phi, res, g, mkt, {}, AdjointMode::continuous), g);
    std::vector<double> errors;
    for (int d = 1; d <= 5; ++d) {
        TailFunction pp = phi;
        TailFunction pm = phi;
        double dot = 0.0;
        const double eps = 1e-6;
        for (int c = 0; c < g.nodes(); ++c) {
            if (c == g.zero_col()) continue;
            const double h = std::cos(d * g.y_at_col(c)) * std::exp(-std::abs(g.y_at_col(c)));
            pp.phi[c] += eps * h;
            pm.phi[c] -= eps * h;
            dot += gt[c] * h;
        }
        const double fd = (objective(pp) - objective(pm)) / (2.0 * eps);
        errors.push_back(std::abs(dot - fd) / std::abs(fd));
    }
    return errors;
}

}  // namespace

TEST_CASE("continuous-mode tail gradient agrees with finite differences to discretization order") {
    const std::vector<double> coarse = continuous_tail_errors(1);
    const std::vector<double> fine = continuous_tail_errors(2);
    CHECK(coarse[0] < 1e-2);
    CHECK(coarse[1] < 1e-2);
    for (std::size_t d = 0; d < coarse.size(); ++d) {
        CAPTURE(d);
        CHECK(fine[d] < 0.6 * coarse[d]);
    }
}

TEST_CASE("solve_adjoint rejects off-grid and duplicate residual nodes") {
    const Grid g = Grid::symmetric(1.0, 10, 1.0, 10);
    const VolSurface a = VolSurface::constant(g, 0.02);
    Residual off;
    off.nodes.push_back({11, 0, 1.0});
    CHECK_THROWS_AS(solve_adjoint(a, TailFunction::zeros(g), off, g, MarketParams()), ConfigError);
    Residual dup;
    dup.nodes.push_back({5, 1, 1.0});
    dup.nodes.push_back({5, 1, 2.0});
    CHECK_THROWS_AS(solve_adjoint(a, TailFunction::zeros(g), dup, g, MarketParams()), ConfigError);
}
