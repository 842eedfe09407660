#include "jdlv/mc.hpp"

#include "jdlv/errors.hpp"
#include "jdlv/rng.hpp"

#include <algorithm>
#include <cmath>

namespace jdlv {

LocalVol local_vol_from_lattice(const VolLattice& lattice) {
    return [lattice](double t, double y) { return std::sqrt(2.0 * interpolate_vol(lattice, t, y)); };
}

LocalVol constant_local_vol(double sigma) {
    return [sigma](double, double) { return sigma; };
}

JumpSampler::JumpSampler(const JumpDensity& nu, const Grid& grid) : width_(grid.dy()) {
    if (nu.nu.size() != static_cast<std::size_t>(grid.nodes())) throw ConfigError("jump density size mismatch");
    const double h = grid.dy();
    const double cell_mean = std::sinh(0.5 * h) / (0.5 * h);
    double acc = 0.0;
    for (int c = 0; c < grid.nodes(); ++c) {
        const double m = nu.nu[c];
        if (m < 0.0) throw DomainError("jump density must be nonnegative");
        if (m == 0.0) continue;
        const double y = grid.y_at_col(c);
        acc += m;
        edges_.push_back(y - 0.5 * h);
        cdf_.push_back(acc);
        kappa_ += m * (std::exp(y) * cell_mean - 1.0);
    }
    lambda_ = acc;
    if (acc > 0.0) {
        for (double& v : cdf_) v /= acc;
        cdf_.back() = 1.0;
    }
}

double JumpSampler::sample(double u) const {
    if (cdf_.empty()) return 0.0;
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t k = std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    const double lo = k == 0 ? 0.0 : cdf_[k - 1];
    const double frac = cdf_[k] > lo ? (u - lo) / (cdf_[k] - lo) : 0.5;
    return edges_[k] + std::clamp(frac, 0.0, 1.0) * width_;
}

std::string_view to_string(PathScheme s) { return s == PathScheme::euler_jump ? "euler_jump" : "euler_dupire"; }

std::string_view to_string(PutPayoff p) { return p == PutPayoff::verbatim ? "verbatim" : "vs_terminal"; }

PutPayoff put_payoff_from_string(std::string_view name) {
    if (name == "verbatim") return PutPayoff::verbatim;
    if (name == "vs_terminal") return PutPayoff::vs_terminal;
    throw ConfigError("unknown put payoff '" + std::string(name) + "' (expected verbatim or vs_terminal)");
}

PathEnsemble simulate_paths(const LocalVol& sigma, const JumpSampler* jumps, double tau, const PathConfig& cfg,
                            const MarketParams& mkt) {
    if (cfg.steps < 1 || cfg.paths < 1) throw ConfigError("path config needs steps >= 1 and paths >= 1");
    if (!(tau > 0.0)) throw ConfigError("maturity must be positive");
    const bool with_jumps = cfg.scheme == PathScheme::euler_jump && jumps != nullptr && jumps->intensity() > 0.0;
    const double dt = tau / cfg.steps;
    const double sdt = std::sqrt(dt);
    const double kappa = with_jumps ? jumps->compensator() : 0.0;
    const double jump_mean = with_jumps ? jumps->intensity() * dt : 0.0;
    const std::uint64_t tau_key = static_cast<std::uint64_t>(std::llround(tau * 1e6));

    PathEnsemble ens;
    ens.tau = tau;
    ens.S0 = mkt.S0;
    ens.terminal.resize(cfg.paths);
    ens.running_min.resize(cfg.paths);
    ens.running_max.resize(cfg.paths);
    for (int p = 0; p < cfg.paths; ++p) {
        const std::uint64_t stream = (tau_key << 32) ^ (static_cast<std::uint64_t>(p) << 1);
        CounterRng diffusion(cfg.seed, stream);
        CounterRng jump_rng(cfg.seed, stream | 1ULL);
        double y = 0.0;
        double lo = 0.0;
        double hi = 0.0;
        for (int k = 0; k < cfg.steps; ++k) {
            const double t = k * dt;
            const double s = sigma(t, y);
            double step = (mkt.r - kappa - 0.5 * s * s) * dt + s * sdt * diffusion.normal();
            if (with_jumps) {
                const int n = jump_rng.poisson(jump_mean);
                for (int j = 0; j < n; ++j) step += jumps->sample(jump_rng.uniform());
            }
            y += step;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        ens.terminal[p] = mkt.S0 * std::exp(y);
        ens.running_min[p] = mkt.S0 * std::exp(lo);
        ens.running_max[p] = mkt.S0 * std::exp(hi);
    }
    return ens;
}

namespace {

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += x[k];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

McPrice mean_and_error(const std::vector<double>& v, double discount) {
    const std::size_t n = v.size();
    const double mean = pairwise_sum(v.data(), n) / n;
    std::vector<double> sq(n);
    for (std::size_t k = 0; k < n; ++k) sq[k] = (v[k] - mean) * (v[k] - mean);
    const double var = n > 1 ? pairwise_sum(sq.data(), n) / (n - 1) : 0.0;
    return {discount * mean, discount * std::sqrt(var / n)};
}

}  // namespace

McPrice lookback_price(LookbackKind kind, const PathEnsemble& ens, double r, PutPayoff put) {
    const std::size_t n = ens.terminal.size();
    if (ens.running_min.size() != n || ens.running_max.size() != n || n == 0)
        throw ConfigError("path ensemble lacks the running extrema");
    std::vector<double> pay(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (kind == LookbackKind::call) pay[k] = std::max(0.0, ens.terminal[k] - ens.running_min[k]);
        else if (put == PutPayoff::verbatim) pay[k] = std::max(0.0, ens.running_max[k]);
        else pay[k] = std::max(0.0, ens.running_max[k] - ens.terminal[k]);
    }
    return mean_and_error(pay, std::exp(-r * ens.tau));
}

McPrice discounted_terminal_mean(const PathEnsemble& ens, double r) {
    return mean_and_error(ens.terminal, std::exp(-r * ens.tau));
}

McPrice european_call(const PathEnsemble& ens, double strike, double r) {
    std::vector<double> pay(ens.terminal.size());
    for (std::size_t k = 0; k < pay.size(); ++k) pay[k] = std::max(0.0, ens.terminal[k] - strike);
    return mean_and_error(pay, std::exp(-r * ens.tau));
}

LookbackTables lookback_tables(const ModelSpec& jump_model, const ModelSpec& dupire_model, const ModelSpec& truth,
                               const Grid& grid, const std::vector<double>& maturities, const PathConfig& cfg,
                               const MarketParams& mkt, PutPayoff put) {
    LookbackTables t;
    t.maturities = maturities;
    t.put_payoff = put;
    auto run = [&](const ModelSpec& m, double tau, McPrice& call, McPrice& lput) {
        PathConfig c = cfg;
        std::optional<JumpSampler> sampler;
        if (m.nu) sampler.emplace(*m.nu, grid);
        c.scheme = sampler ? PathScheme::euler_jump : PathScheme::euler_dupire;
        const PathEnsemble ens = simulate_paths(m.sigma, sampler ? &*sampler : nullptr, tau, c, mkt);
        call = lookback_price(LookbackKind::call, ens, mkt.r);
        lput = lookback_price(LookbackKind::put, ens, mkt.r, put);
    };
    t.call_ranking_holds = true;
    for (double tau : maturities) {
        McPrice cj, cd, ct, pj, pd, pt;
        run(jump_model, tau, cj, pj);
        run(dupire_model, tau, cd, pd);
        run(truth, tau, ct, pt);
        t.call_jump.push_back(cj);
        t.call_dupire.push_back(cd);
        t.call_true.push_back(ct);
        t.put_jump.push_back(pj);
        t.put_dupire.push_back(pd);
        t.put_true.push_back(pt);
        t.call_err_jump.push_back(std::abs(cj.price - ct.price) / ct.price);
        t.call_err_dupire.push_back(std::abs(cd.price - ct.price) / ct.price);
        t.put_err_jump.push_back(std::abs(pj.price - pt.price) / pt.price);
        t.put_err_dupire.push_back(std::abs(pd.price - pt.price) / pt.price);
        if (!(t.call_err_jump.back() < t.call_err_dupire.back())) t.call_ranking_holds = false;
    }
    return t;
}

}  // namespace jdlv
