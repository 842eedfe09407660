#include "jdlv/adjoint.hpp"

#include "jdlv/errors.hpp"
#include "scheme.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace jdlv {

std::string_view to_string(AdjointMode mode) { return mode == AdjointMode::discrete ? "discrete" : "continuous"; }

AdjointMode adjoint_mode_from_string(std::string_view name) {
    if (name == "discrete") return AdjointMode::discrete;
    if (name == "continuous") return AdjointMode::continuous;
    throw ConfigError("unknown adjoint mode '" + std::string(name) + "' (expected discrete or continuous)");
}

void Residual::validate(const Grid& grid) const {
    std::set<std::pair<int, int>> seen;
    for (const ResidualNode& q : nodes) {
        if (q.i < 0 || q.i > grid.steps() || !grid.contains_j(q.j)) {
            std::ostringstream msg;
            msg << "residual node (i=" << q.i << ", j=" << q.j << ") is off the grid";
            throw ConfigError(msg.str());
        }
        if (!seen.emplace(q.i, q.j).second) {
            std::ostringstream msg;
            msg << "duplicate residual node (i=" << q.i << ", j=" << q.j << ")";
            throw ConfigError(msg.str());
        }
    }
}

AdjointSurface solve_adjoint(const VolSurface& a, const TailFunction& phi, const Residual& residual, const Grid& grid,
                             const MarketParams& mkt, const SchemeOptions& opts, AdjointMode mode) {
    const int n = grid.nodes();
    const int m = n - 2;
    const int steps = grid.steps();
    if (a.a.rows() != grid.levels() || a.a.cols() != n || phi.phi.size() != static_cast<std::size_t>(n))
        throw ConfigError("solve_adjoint: vol or tail shape does not match the grid");
    residual.validate(grid);

    Surface source(grid.levels(), n);
    std::vector<char> has_source(grid.levels(), 0);
    for (const ResidualNode& q : residual.nodes) {
        const int c = grid.col(q.j);
        if (q.i == 0 || c == 0 || c == n - 1) continue;
        source(q.i, c) = q.value;
        has_source[q.i] = 1;
    }
    Surface nodal(mode == AdjointMode::continuous ? grid.levels() : 0, n);
    std::vector<double> jump(n, 0.0);

    AdjointSurface out{Surface(grid.levels(), n), mode};
    const std::vector<double> w = convolution_weights(phi, grid, opts.weight_mode);
    bool has_jumps = false;
    for (double v : w) has_jumps = has_jumps || v != 0.0;

    detail::Convolver conv(grid);
    std::vector<double> rhs(n, 0.0);
    std::vector<double> scratch(n, 0.0);
    std::vector<double> sub(m);
    std::vector<double> sup(m);
    const int last = mode == AdjointMode::discrete ? 1 : 0;
    for (int i = steps; i >= last; --i) {
        std::fill(rhs.begin(), rhs.end(), 0.0);
        if (i < steps) {
            const auto next = out.w.row(i + 1);
            const int coeff_level = mode == AdjointMode::discrete ? i : i + 1;
            detail::apply_explicit_transpose(a.a.row(coeff_level), next, grid, mkt.r, rhs);
            if (has_jumps) {
                conv.apply_transpose(w, next, scratch);
                for (int c = 1; c < n - 1; ++c) rhs[c] += scratch[c];
            }
        }
        for (int c = 1; c < n - 1; ++c) rhs[c] += source(i, c);

        const detail::Tridiagonal t = detail::implicit_matrix(a.a.row(i), grid, mkt.r);
        for (int k = 0; k < m; ++k) {
            const int c = k + 1;
            sub[k] = c > 1 ? t.sup[c - 1] : 0.0;
            sup[k] = c < n - 2 ? t.sub[c + 1] : 0.0;
        }
        thomas_solve(sub, std::span(t.diag).subspan(1, m), sup, std::span(rhs).subspan(1, m), i);
        auto cur = out.w.row(i);
        for (int c = 1; c < n - 1; ++c) cur[c] = rhs[c];
        if (mode == AdjointMode::continuous && has_source[i]) {
            // w jumps across a quote level; keep the march value and record the two-sided mean
            for (int c = 1; c < n - 1; ++c) jump[c] = source(i, c);
            thomas_solve(sub, std::span(t.diag).subspan(1, m), sup, std::span(jump).subspan(1, m), i);
            for (int c = 1; c < n - 1; ++c) nodal(i, c) = rhs[c] - 0.5 * jump[c];
        } else if (mode == AdjointMode::continuous) {
            for (int c = 1; c < n - 1; ++c) nodal(i, c) = rhs[c];
        }
    }

    if (mode == AdjointMode::continuous) {
        const double scale = 1.0 / grid.dy();
        out.w = std::move(nodal);
        for (double& v : out.w.values()) v *= scale;
    }
    return out;
}

namespace {

void check_pair(const PriceSurface& u, const AdjointSurface& w, const Grid& grid) {
    if (u.u.rows() != grid.levels() || u.u.cols() != grid.nodes() || w.w.rows() != grid.levels() ||
        w.w.cols() != grid.nodes())
        throw ConfigError("price and adjoint surfaces must match the grid");
}

double trapezoid_weight(int i, int steps) { return (i == 0 || i == steps) ? 0.5 : 1.0; }

}  // namespace

Surface grad_vol(const PriceSurface& u, const AdjointSurface& w, const Grid& grid) {
    check_pair(u, w, grid);
    const int n = grid.nodes();
    const int steps = grid.steps();
    Surface g(grid.levels(), n);
    if (w.mode == AdjointMode::discrete) {
        for (int i = 0; i <= steps; ++i) {
            const auto ui = u.u.row(i);
            for (int c = 1; c < n - 1; ++c) {
                double lam = i > 0 ? w.w(i, c) : 0.0;
                if (i < steps) lam += w.w(i + 1, c);
                if (lam != 0.0) g(i, c) = lam * detail::vol_sensitivity(ui, c, grid);
            }
        }
        return g;
    }
    const double dy = grid.dy();
    const double cell = grid.dtau() * dy;
    for (int i = 0; i <= steps; ++i) {
        const auto ui = u.u.row(i);
        const double tw = trapezoid_weight(i, steps) * cell;
        for (int c = 1; c < n - 1; ++c) {
            const double uyy = (ui[c + 1] - 2.0 * ui[c] + ui[c - 1]) / (dy * dy);
            const double uy = (ui[c + 1] - ui[c - 1]) / (2.0 * dy);
            g(i, c) = tw * w.w(i, c) * (uyy - uy);
        }
    }
    return g;
}

std::vector<double> grad_tail(const PriceSurface& u, const AdjointSurface& w, const Grid& grid,
                              const SchemeOptions& opts) {
    check_pair(u, w, grid);
    const int n = grid.nodes();
    const int steps = grid.steps();
    std::vector<double> g(n, 0.0);
    detail::Convolver conv(grid);
    if (w.mode == AdjointMode::discrete) {
        for (int i = 1; i <= steps; ++i) {
            conv.differences(u.u.row(i - 1), false);
            conv.accumulate_weight_gradient(w.w.row(i), g);
        }
    } else {
        std::vector<double> lam(n);
        for (int i = 0; i <= steps; ++i) {
            const double tw = trapezoid_weight(i, steps) * grid.dy();
            const auto wi = w.w.row(i);
            for (int c = 0; c < n; ++c) lam[c] = tw * wi[c];
            conv.differences(u.u.row(i), false);
            conv.accumulate_weight_gradient(lam, g);
        }
    }
    if (opts.weight_mode == WeightMode::paper) {
        for (int c = 0; c < n; ++c) g[c] *= std::exp(grid.y_at_col(c));
    }
    return g;
}

}  // namespace jdlv
