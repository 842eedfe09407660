#include "jdlv/regularization.hpp"

#include "jdlv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jdlv {

MisfitResult misfit(const PriceSurface& u, const QuoteSet& quotes, const Grid& grid) {
    if (quotes.quotes.empty()) throw DomainError("misfit needs at least one quote");
    MisfitResult out;
    out.residuals.reserve(quotes.size());
    double data = 0.0;
    for (const Quote& q : quotes.quotes) {
        const double r = u.u(grid.i_of(q.tau), grid.col(grid.j_of(q.y))) - q.price;
        out.residuals.push_back(r);
        out.value += q.weight * r * r;
        data += q.weight * q.price * q.price;
    }
    out.normalized_residual = data > 0.0 ? std::sqrt(out.value / data) : std::sqrt(out.value);
    return out;
}

std::string_view to_string(PenaltyKind kind) {
    switch (kind) {
    case PenaltyKind::sobolev_vol: return "sobolev_vol";
    case PenaltyKind::kl_tail: return "kl_tail";
    case PenaltyKind::l2_tail: return "l2_tail";
    }
    return "?";
}

PenaltyKind penalty_kind_from_string(std::string_view name) {
    if (name == "sobolev_vol") return PenaltyKind::sobolev_vol;
    if (name == "kl_tail" || name == "kl") return PenaltyKind::kl_tail;
    if (name == "l2_tail" || name == "l2") return PenaltyKind::l2_tail;
    throw ConfigError("unknown penalty '" + std::string(name) + "'");
}

Penalty Penalty::sobolev(const VolLattice& prior, SobolevWeights w, bool divide_by_spacing) {
    Penalty p;
    p.kind = PenaltyKind::sobolev_vol;
    p.prior = prior.values;
    p.weights = w;
    p.rows = prior.rows();
    p.cols = prior.cols();
    if (divide_by_spacing) {
        p.dtau = prior.rows() > 1 ? prior.taus[1] - prior.taus[0] : 1.0;
        p.dy = prior.cols() > 1 ? prior.ys[1] - prior.ys[0] : 1.0;
    }
    return p;
}

Penalty Penalty::tail(PenaltyKind kind, const TailFunction& prior, const Grid& grid) {
    if (kind == PenaltyKind::sobolev_vol) throw ConfigError("sobolev penalty does not apply to the tail");
    Penalty p;
    p.kind = kind;
    p.prior = prior.phi;
    p.skip.assign(prior.phi.size(), 0);
    p.skip[grid.zero_col()] = 1;
    return p;
}

ValueGrad penalty_value_and_grad(std::span<const double> x, const Penalty& penalty) {
    if (x.size() != penalty.prior.size()) throw ConfigError("penalty: parameter and prior sizes differ");
    const std::size_t n = x.size();
    ValueGrad out{0.0, std::vector<double>(n, 0.0)};
    auto skipped = [&](std::size_t k) { return !penalty.skip.empty() && penalty.skip[k]; };

    switch (penalty.kind) {
    case PenaltyKind::sobolev_vol: {
        if (penalty.rows * penalty.cols != n) throw ConfigError("sobolev penalty: lattice shape does not match");
        const SobolevWeights& w = penalty.weights;
        std::vector<double> d(n);
        for (std::size_t k = 0; k < n; ++k) d[k] = x[k] - penalty.prior[k];
        for (std::size_t k = 0; k < n; ++k) {
            out.value += w.w0 * d[k] * d[k];
            out.grad[k] += 2.0 * w.w0 * d[k];
        }
        const std::size_t nc = penalty.cols;
        for (std::size_t r = 0; r + 1 < penalty.rows; ++r) {
            for (std::size_t c = 0; c < nc; ++c) {
                const std::size_t k = r * nc + c;
                const double g = (d[k + nc] - d[k]) / penalty.dtau;
                out.value += w.wtau * g * g;
                out.grad[k + nc] += 2.0 * w.wtau * g / penalty.dtau;
                out.grad[k] -= 2.0 * w.wtau * g / penalty.dtau;
            }
        }
        for (std::size_t r = 0; r < penalty.rows; ++r) {
            for (std::size_t c = 0; c + 1 < nc; ++c) {
                const std::size_t k = r * nc + c;
                const double g = (d[k + 1] - d[k]) / penalty.dy;
                out.value += w.wy * g * g;
                out.grad[k + 1] += 2.0 * w.wy * g / penalty.dy;
                out.grad[k] -= 2.0 * w.wy * g / penalty.dy;
            }
        }
        break;
    }
    case PenaltyKind::kl_tail:
        for (std::size_t k = 0; k < n; ++k) {
            if (skipped(k)) continue;
            const double x0 = penalty.prior[k];
            if (x0 == 0.0 && x[k] == 0.0) continue;
            if (!(x0 > 0.0) || !(x[k] > 0.0)) {
                std::ostringstream msg;
                msg << "KL penalty needs positive entries (index " << k << ": x=" << x[k] << ", prior=" << x0 << ")";
                throw DomainError(msg.str());
            }
            const double l = std::log(x[k] / x0);
            out.value += x[k] * l - x[k] + x0;
            out.grad[k] = l;
        }
        break;
    case PenaltyKind::l2_tail:
        for (std::size_t k = 0; k < n; ++k) {
            if (skipped(k)) continue;
            const double d = x[k] - penalty.prior[k];
            out.value += d * d;
            out.grad[k] = 2.0 * d;
        }
        break;
    }
    return out;
}

TikhonovObjective::TikhonovObjective(const Grid& grid, QuoteSet quotes, TikhonovConfig cfg)
    : grid_(grid), quotes_(std::move(quotes)), cfg_(std::move(cfg)) {
    if (cfg_.alpha1 < 0.0 || cfg_.alpha2 < 0.0) throw ConfigError("regularization weights must be nonnegative");
    if (quotes_.quotes.empty()) throw DomainError("objective needs at least one quote");
    quotes_.validate(grid_, cfg_.mkt);
    nodes_ = quote_nodes(quotes_, grid_);
}

Evaluation TikhonovObjective::evaluate(const VolLattice& vol, const TailFunction& phi, bool want_vol_grad,
                                       bool want_tail_grad) const {
    const VolSurface a = interpolate_vol(vol, grid_);
    const PriceSurface u = solve_forward(a, phi, grid_, cfg_.mkt, cfg_.scheme);
    const MisfitResult m = misfit(u, quotes_, grid_);

    Evaluation e;
    e.misfit = m.value;
    e.normalized_residual = m.normalized_residual;
    ValueGrad pv;
    ValueGrad pt;
    if (cfg_.alpha1 > 0.0) {
        pv = penalty_value_and_grad(vol.values, cfg_.vol_penalty);
        e.vol_penalty = pv.value;
    }
    if (cfg_.alpha2 > 0.0) {
        pt = penalty_value_and_grad(phi.phi, cfg_.tail_penalty);
        e.tail_penalty = pt.value;
    }
    e.value = e.misfit + cfg_.alpha1 * e.vol_penalty + cfg_.alpha2 * e.tail_penalty;
    if (!want_vol_grad && !want_tail_grad) return e;

    Residual res;
    res.nodes.reserve(nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        res.nodes.push_back({nodes_[k].i, nodes_[k].j, 2.0 * quotes_.quotes[k].weight * m.residuals[k]});
    }
    const AdjointSurface w = solve_adjoint(a, phi, res, grid_, cfg_.mkt, cfg_.scheme);
    if (want_vol_grad) {
        e.grad_vol = interpolate_vol_transpose(vol, grid_, grad_vol(u, w, grid_));
        if (cfg_.alpha1 > 0.0) {
            for (std::size_t k = 0; k < e.grad_vol.size(); ++k) e.grad_vol[k] += cfg_.alpha1 * pv.grad[k];
        }
    }
    if (want_tail_grad) {
        e.grad_phi = grad_tail(u, w, grid_, cfg_.scheme);
        if (cfg_.alpha2 > 0.0) {
            for (std::size_t k = 0; k < e.grad_phi.size(); ++k) e.grad_phi[k] += cfg_.alpha2 * pt.grad[k];
        }
        e.grad_phi[grid_.zero_col()] = 0.0;
    }
    return e;
}

TailMap nodal_tail_map(const Grid& grid) {
    const int zero = grid.zero_col();
    TailMap map;
    map.to_phi = [](std::span<const double> p) { return TailFunction{{p.begin(), p.end()}}; };
    map.pullback = [](std::span<const double>, std::span<const double> dphi) {
        return std::vector<double>(dphi.begin(), dphi.end());
    };
    map.project = [zero](std::span<double> p) {
        for (double& v : p) v = std::max(v, 0.0);
        p[zero] = 0.0;
    };
    return map;
}

namespace {

StopRule residual_rule(const DescendOptions& opts, const double& last_residual, std::vector<double>& history) {
    return [&opts, &last_residual, &history](int, std::span<const double>, double) {
        history.push_back(last_residual);
        if (opts.residual_tol > 0.0 && last_residual < opts.residual_tol) return true;
        return opts.delta && discrepancy_check(last_residual, *opts.delta, opts.lambda) == Discrepancy::stop;
    };
}

}  // namespace

DescendResult descend_vol(const VolLattice& x0, const TailFunction& phi, const TikhonovObjective& objective,
                          const DescendOptions& opts) {
    VolLattice work = x0;
    double last_residual = 0.0;
    auto evaluate = [&](std::span<const double> x) {
        std::copy(x.begin(), x.end(), work.values.begin());
        const Evaluation e = objective.evaluate(work, phi, true, false);
        last_residual = e.normalized_residual;
        return ValueGrad{e.value, e.grad_vol};
    };
    auto project = [&opts](std::span<double> x) {
        for (double& v : x) v = std::clamp(v, opts.a_lower, opts.a_upper);
    };
    DescendResult out;
    out.inner = projected_descent(x0.values, evaluate, project, opts.inner, residual_rule(opts, last_residual, out.residuals));
    out.x = out.inner.x;
    std::copy(out.x.begin(), out.x.end(), work.values.begin());
    out.final = objective.evaluate(work, phi, false, false);
    return out;
}

DescendResult descend_tail(std::vector<double> p0, const TailMap& map, const VolLattice& vol,
                           const TikhonovObjective& objective, const DescendOptions& opts) {
    double last_residual = 0.0;
    auto evaluate = [&](std::span<const double> p) {
        const Evaluation e = objective.evaluate(vol, map.to_phi(p), false, true);
        last_residual = e.normalized_residual;
        return ValueGrad{e.value, map.pullback(p, e.grad_phi)};
    };
    DescendResult out;
    out.inner = projected_descent(std::move(p0), evaluate, map.project, opts.inner, residual_rule(opts, last_residual, out.residuals));
    out.x = out.inner.x;
    out.final = objective.evaluate(vol, map.to_phi(out.x), false, false);
    return out;
}

Discrepancy discrepancy_check(double residual_norm, double delta, double lambda) {
    if (delta < 0.0) throw DomainError("noise level delta must be nonnegative");
    if (delta == 0.0) return Discrepancy::proceed;
    return residual_norm < lambda * delta ? Discrepancy::stop : Discrepancy::proceed;
}

}  // namespace jdlv
