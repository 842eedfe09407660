#include "jdlv/splitting.hpp"

#include "jdlv/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace jdlv {

std::string_view to_string(TailMode mode) { return mode == TailMode::nodal ? "nodal" : "log_fourier"; }

TailMode tail_mode_from_string(std::string_view name) {
    if (name == "nodal") return TailMode::nodal;
    if (name == "log_fourier") return TailMode::log_fourier;
    throw ConfigError("unknown tail mode '" + std::string(name) + "'");
}

std::string_view to_string(Block b) { return b == Block::vol ? "vol" : "tail"; }

std::string_view to_string(SplitStop s) {
    switch (s) {
    case SplitStop::residual: return "residual";
    case SplitStop::discrepancy: return "discrepancy";
    case SplitStop::stationary: return "stationary";
    case SplitStop::outer_max: return "outer_max";
    }
    return "?";
}

std::vector<double> TailParametrization::params() const {
    if (mode == TailMode::nodal) return nodal;
    std::vector<double> p(c_minus);
    p.insert(p.end(), c_plus.begin(), c_plus.end());
    return p;
}

void TailParametrization::set_params(std::span<const double> p) {
    if (mode == TailMode::nodal) {
        nodal.assign(p.begin(), p.end());
        return;
    }
    if (p.size() != c_minus.size() + c_plus.size()) throw ConfigError("tail parameter count mismatch");
    std::copy(p.begin(), p.begin() + c_minus.size(), c_minus.begin());
    std::copy(p.begin() + c_minus.size(), p.end(), c_plus.begin());
}

namespace {

constexpr double kGammaMax = 50.0;

/// Basis value k at column c, or 0 at the center column.
double basis(int k, int c, const Grid& grid) {
    const double y = grid.y_at_col(c);
    if (y < 0.0) return std::cos(k * std::numbers::pi * (y - grid.y_min()) / (0.0 - grid.y_min()));
    return std::cos(k * std::numbers::pi * y / grid.y_max());
}

double gamma_at(const TailParametrization& p, int c, const Grid& grid) {
    const auto& coef = grid.y_at_col(c) < 0.0 ? p.c_minus : p.c_plus;
    double g = 0.0;
    for (std::size_t k = 0; k < coef.size(); ++k) g += coef[k] * basis(static_cast<int>(k), c, grid);
    return g;
}

}  // namespace

TailEvaluation tail_coeffs_to_phi(const TailParametrization& p, const Grid& grid) {
    TailEvaluation out{TailFunction::zeros(grid), false};
    if (p.mode == TailMode::nodal) {
        if (p.nodal.size() != static_cast<std::size_t>(grid.nodes())) throw ConfigError("nodal tail size mismatch");
        out.phi.phi = p.nodal;
        out.phi.phi[grid.zero_col()] = 0.0;
        return out;
    }
    for (int c = 0; c < grid.nodes(); ++c) {
        if (c == grid.zero_col()) continue;
        double g = gamma_at(p, c, grid);
        if (g > kGammaMax) {
            g = kGammaMax;
            out.clamped = true;
        }
        out.phi.phi[c] = std::exp(g);
    }
    return out;
}

TailParametrization fit_log_fourier(const TailFunction& phi, const Grid& grid, int terms) {
    TailParametrization p;
    p.mode = TailMode::log_fourier;
    for (int side = 0; side < 2; ++side) {
        std::vector<int> cols;
        for (int c = 0; c < grid.nodes(); ++c) {
            const double y = grid.y_at_col(c);
            if ((side == 0 ? y < 0.0 : y > 0.0) && phi.phi[c] > 0.0) cols.push_back(c);
        }
        std::vector<double> coef(terms, 0.0);
        if (static_cast<int>(cols.size()) >= terms) {
            Eigen::MatrixXd X(cols.size(), terms);
            Eigen::VectorXd b(cols.size());
            for (std::size_t r = 0; r < cols.size(); ++r) {
                for (int k = 0; k < terms; ++k) X(r, k) = basis(k, cols[r], grid);
                b(r) = std::log(phi.phi[cols[r]]);
            }
            const Eigen::VectorXd sol = X.colPivHouseholderQr().solve(b);
            for (int k = 0; k < terms; ++k) coef[k] = sol(k);
        }
        (side == 0 ? p.c_minus : p.c_plus) = coef;
    }
    return p;
}

TailMap tail_map(const TailParametrization& shape, const Grid& grid) {
    if (shape.mode == TailMode::nodal) return nodal_tail_map(grid);
    TailMap map;
    map.to_phi = [shape, grid](std::span<const double> p) {
        TailParametrization t = shape;
        t.set_params(p);
        return tail_coeffs_to_phi(t, grid).phi;
    };
    map.pullback = [shape, grid](std::span<const double> p, std::span<const double> dphi) {
        TailParametrization t = shape;
        t.set_params(p);
        const std::size_t km = t.c_minus.size();
        std::vector<double> g(p.size(), 0.0);
        for (int c = 0; c < grid.nodes(); ++c) {
            if (c == grid.zero_col() || dphi[c] == 0.0) continue;
            const double gam = gamma_at(t, c, grid);
            if (gam > kGammaMax) continue;
            const double d = dphi[c] * std::exp(gam);
            const bool neg = grid.y_at_col(c) < 0.0;
            const std::size_t terms = neg ? km : t.c_plus.size();
            for (std::size_t k = 0; k < terms; ++k) g[(neg ? 0 : km) + k] += d * basis(static_cast<int>(k), c, grid);
        }
        return g;
    };
    map.project = [](std::span<double>) {};
    return map;
}

SplitState split_calibrate(const TikhonovObjective& objective, SplitState state, const SplitConfig& cfg) {
    const Grid& grid = objective.grid();
    const TailMap map = tail_map(state.tail, grid);

    auto record_stop = [&](const Evaluation& e) {
        if (cfg.residual_tol > 0.0 && e.normalized_residual <= cfg.residual_tol) {
            state.stop = SplitStop::residual;
            return true;
        }
        if (cfg.delta && discrepancy_check(e.normalized_residual, *cfg.delta, cfg.lambda) == Discrepancy::stop) {
            state.stop = SplitStop::discrepancy;
            return true;
        }
        return false;
    };

    Evaluation start = objective.evaluate(state.a, tail_coeffs_to_phi(state.tail, grid).phi, false, false);
    state.initial_objective = start.value;
    state.initial_residual = start.normalized_residual;
    state.outer_iter = 0;
    if (record_stop(start)) return state;

    double last_value = start.value;
    std::vector<Block> order;
    if (cfg.first == Block::vol) {
        if (cfg.optimize_vol) order.push_back(Block::vol);
        if (cfg.optimize_tail) order.push_back(Block::tail);
    } else {
        if (cfg.optimize_tail) order.push_back(Block::tail);
        if (cfg.optimize_vol) order.push_back(Block::vol);
    }
    if (order.empty()) {
        state.stop = SplitStop::stationary;
        return state;
    }

    for (int outer = 1; outer <= cfg.outer_max; ++outer) {
        state.outer_iter = outer;
        bool all_stationary = true;
        for (Block b : order) {
            DescendOptions opts = b == Block::vol ? cfg.vol : cfg.tail;
            opts.residual_tol = cfg.residual_tol;
            opts.delta = cfg.delta;
            opts.lambda = cfg.lambda;
            DescendResult r;
            if (b == Block::vol) {
                r = descend_vol(state.a, tail_coeffs_to_phi(state.tail, grid).phi, objective, opts);
                state.a.values = r.x;
            } else {
                r = descend_tail(state.tail.params(), map, state.a, objective, opts);
                state.tail.set_params(r.x);
            }
            HistoryEntry h;
            h.outer = outer;
            h.block = b;
            h.inner_iterations = r.inner.iterations;
            h.inner_exit = r.inner.exit;
            h.objective = r.final.value;
            h.misfit = r.final.misfit;
            h.normalized_residual = r.final.normalized_residual;
            h.vol_penalty = r.final.vol_penalty;
            h.tail_penalty = r.final.tail_penalty;
            h.grad_norm = r.inner.grad_norm;
            state.history.push_back(h);
            if (cfg.progress) cfg.progress(h);

            if (r.inner.exit == DescentExit::stalled) state.stalled = true;
            if (h.objective > last_value * (1.0 + 1e-12) + 1e-300) state.monotone = false;
            last_value = h.objective;
            all_stationary = all_stationary && (r.inner.exit == DescentExit::converged);
            if (record_stop(r.final)) return state;
        }
        if (all_stationary) {
            state.stop = SplitStop::stationary;
            return state;
        }
    }
    state.stop = SplitStop::outer_max;
    return state;
}

}  // namespace jdlv
