#include "jdlv/forward_pide.hpp"

#include "jdlv/errors.hpp"
#include "scheme.hpp"

#include <cmath>
#include <sstream>

namespace jdlv {

namespace {

void check_shapes(const VolSurface& a, const TailFunction& phi, const Grid& grid) {
    if (a.a.rows() != grid.levels() || a.a.cols() != grid.nodes()) {
        std::ostringstream msg;
        msg << "vol surface is " << a.a.rows() << "x" << a.a.cols() << ", grid needs " << grid.levels() << "x"
            << grid.nodes();
        throw ConfigError(msg.str());
    }
    if (phi.phi.size() != static_cast<std::size_t>(grid.nodes())) throw ConfigError("tail size does not match grid");
}

}  // namespace

std::string_view to_string(WeightMode mode) { return mode == WeightMode::paper ? "paper" : "plain"; }

WeightMode weight_mode_from_string(std::string_view name) {
    if (name == "paper") return WeightMode::paper;
    if (name == "plain") return WeightMode::plain;
    throw ConfigError("unknown weight mode '" + std::string(name) + "' (expected paper or plain)");
}

std::vector<double> convolution_weights(const TailFunction& phi, const Grid& grid, WeightMode mode) {
    std::vector<double> w(phi.phi);
    if (mode == WeightMode::paper) {
        for (int c = 0; c < grid.nodes(); ++c) w[c] *= std::exp(grid.y_at_col(c));
    }
    return w;
}

std::vector<double> convolution_term(std::span<const double> u_row, const TailFunction& phi, const Grid& grid,
                                     WeightMode mode) {
    if (u_row.size() != static_cast<std::size_t>(grid.nodes()) || phi.phi.size() != u_row.size())
        throw ConfigError("convolution_term: row and tail must have grid.nodes() entries");
    detail::Convolver conv(grid);
    conv.differences(u_row, false);
    std::vector<double> out(grid.nodes(), 0.0);
    conv.apply(convolution_weights(phi, grid, mode), out);
    return out;
}

void thomas_solve(std::span<const double> sub, std::span<const double> diag, std::span<const double> sup,
                  std::span<double> rhs, int step) {
    const std::size_t n = diag.size();
    std::vector<double> c(n);
    double pivot = diag[0];
    if (std::abs(pivot) < 1e-14) throw NumericalBreakdown("Thomas pivot below 1e-14", step);
    c[0] = sup[0] / pivot;
    rhs[0] /= pivot;
    for (std::size_t k = 1; k < n; ++k) {
        pivot = diag[k] - sub[k] * c[k - 1];
        if (std::abs(pivot) < 1e-14) throw NumericalBreakdown("Thomas pivot below 1e-14", step);
        c[k] = k + 1 < n ? sup[k] / pivot : 0.0;
        rhs[k] = (rhs[k] - sub[k] * rhs[k - 1]) / pivot;
    }
    for (std::size_t k = n - 1; k-- > 0;) rhs[k] -= c[k] * rhs[k + 1];
}

PriceSurface solve_forward(const VolSurface& a, const TailFunction& phi, const Grid& grid, const MarketParams& mkt,
                           const SchemeOptions& opts) {
    check_shapes(a, phi, grid);
    const int n = grid.nodes();
    const int m = n - 2;
    PriceSurface out{Surface(grid.levels(), n)};
    const std::vector<double> pay = grid.payoff_row();
    std::copy(pay.begin(), pay.end(), out.u.row(0).begin());

    const std::vector<double> w = convolution_weights(phi, grid, opts.weight_mode);
    bool has_jumps = false;
    for (double v : w) has_jumps = has_jumps || v != 0.0;

    detail::Convolver conv(grid);
    std::vector<double> rhs(n);
    std::vector<double> jump(n, 0.0);
    for (int i = 1; i <= grid.steps(); ++i) {
        auto prev = out.u.row(i - 1);
        detail::apply_explicit(a.a.row(i - 1), prev, grid, mkt.r, rhs);
        if (has_jumps) {
            conv.differences(prev, false);
            conv.apply(w, jump);
            for (int c = 1; c < n - 1; ++c) rhs[c] += jump[c];
        }
        const detail::Tridiagonal t = detail::implicit_matrix(a.a.row(i), grid, mkt.r);
        rhs[1] -= t.sub[1] * pay[0];
        rhs[n - 2] -= t.sup[n - 2] * pay[n - 1];
        thomas_solve(std::span(t.sub).subspan(1, m), std::span(t.diag).subspan(1, m), std::span(t.sup).subspan(1, m),
                     std::span(rhs).subspan(1, m), i);
        auto cur = out.u.row(i);
        cur[0] = pay[0];
        cur[n - 1] = pay[n - 1];
        for (int c = 1; c < n - 1; ++c) cur[c] = rhs[c];
    }
    return out;
}

Surface solve_tangent(const VolSurface& a, const TailFunction& phi, const PriceSurface& u, const Surface& da,
                      std::span<const double> dphi, const Grid& grid, const MarketParams& mkt,
                      const SchemeOptions& opts) {
    check_shapes(a, phi, grid);
    const int n = grid.nodes();
    const int m = n - 2;
    if (da.rows() != grid.levels() || da.cols() != n || dphi.size() != static_cast<std::size_t>(n))
        throw ConfigError("solve_tangent: direction shapes do not match the grid");

    Surface v(grid.levels(), n);
    const std::vector<double> w = convolution_weights(phi, grid, opts.weight_mode);
    const std::vector<double> dw =
        convolution_weights(TailFunction{{dphi.begin(), dphi.end()}}, grid, opts.weight_mode);

    detail::Convolver conv(grid);
    std::vector<double> rhs(n);
    std::vector<double> jump(n, 0.0);
    for (int i = 1; i <= grid.steps(); ++i) {
        detail::apply_explicit(a.a.row(i - 1), v.row(i - 1), grid, mkt.r, rhs);
        conv.differences(v.row(i - 1), true);
        conv.apply(w, jump);
        for (int c = 1; c < n - 1; ++c) rhs[c] += jump[c];
        conv.differences(u.u.row(i - 1), false);
        conv.apply(dw, jump);
        const auto u_prev = u.u.row(i - 1);
        const auto u_cur = u.u.row(i);
        for (int c = 1; c < n - 1; ++c) {
            rhs[c] += jump[c] + da(i, c) * detail::vol_sensitivity(u_cur, c, grid) +
                      da(i - 1, c) * detail::vol_sensitivity(u_prev, c, grid);
        }
        const detail::Tridiagonal t = detail::implicit_matrix(a.a.row(i), grid, mkt.r);
        thomas_solve(std::span(t.sub).subspan(1, m), std::span(t.diag).subspan(1, m), std::span(t.sup).subspan(1, m),
                     std::span(rhs).subspan(1, m), i);
        auto cur = v.row(i);
        for (int c = 1; c < n - 1; ++c) cur[c] = rhs[c];
    }
    return v;
}

}  // namespace jdlv
