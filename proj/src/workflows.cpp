#include "jdlv/workflows.hpp"

#include "jdlv/errors.hpp"
#include "jdlv/io.hpp"
#include "jdlv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace jdlv {

namespace {

std::string_view to_string(VolModel m) { return m == VolModel::reference ? "reference" : "constant"; }

VolModel vol_model_from_string(const std::string& s) {
    if (s == "reference") return VolModel::reference;
    if (s == "constant") return VolModel::constant;
    throw ConfigError("unknown vol_model '" + s + "' (expected reference or constant)");
}

std::string_view to_string(JumpModel m) {
    switch (m) {
    case JumpModel::gaussian: return "gaussian";
    case JumpModel::prior: return "prior";
    case JumpModel::none: return "none";
    }
    return "?";
}

JumpModel jump_model_from_string(const std::string& s) {
    if (s == "gaussian") return JumpModel::gaussian;
    if (s == "prior") return JumpModel::prior;
    if (s == "none") return JumpModel::none;
    throw ConfigError("unknown jump_model '" + s + "' (expected gaussian, prior or none)");
}

std::string_view to_string(NodeSet n) { return n == NodeSet::vol ? "vol" : "joint"; }

NodeSet node_set_from_string(const std::string& s) {
    if (s == "vol") return NodeSet::vol;
    if (s == "joint") return NodeSet::joint;
    throw ConfigError("unknown nodes '" + s + "' (expected vol or joint)");
}

template <class T>
T get(const nlohmann::json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

RunConfig RunConfig::named(std::string_view preset) {
    RunConfig c;
    c.preset = std::string(preset);
    if (preset == "custom") return c;
    if (preset == "table1") {
        c.vol_model = VolModel::constant;
        c.vol_constant = 0.0113;
        return c;
    }
    if (preset == "sec71") return c;
    if (preset == "sec72") {
        c.tail_penalty = PenaltyKind::kl_tail;
        c.tail_mode = TailMode::nodal;
        c.alpha2 = 1e-5;
        return c;
    }
    if (preset == "sec73") {
        c.nodes = NodeSet::joint;
        c.alpha2 = 1e-5;
        c.residual_tol = 0.002;
        c.vol_iters = 300;
        c.tail_iters = 300;
        return c;
    }
    throw ConfigError("unknown preset '" + std::string(preset) + "' (expected table1, sec71, sec72, sec73, custom)");
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["preset"] = preset;
    j["grid"] = grid_to_json(grid);
    j["r"] = mkt.r;
    j["S0"] = mkt.S0;
    j["weight_mode"] = std::string(jdlv::to_string(scheme.weight_mode));
    j["vol_model"] = std::string(to_string(vol_model));
    j["vol_constant"] = vol_constant;
    j["jump_model"] = std::string(to_string(jump_model));
    j["nodes"] = std::string(to_string(nodes));
    j["noise"] = noise;
    j["seed"] = seed;
    j["alpha1"] = alpha1;
    j["alpha2"] = alpha2;
    j["sobolev"] = {{"w0", sobolev.w0}, {"wtau", sobolev.wtau}, {"wy", sobolev.wy}};
    j["sobolev_divide_by_spacing"] = sobolev_divide_by_spacing;
    j["tail_penalty"] = std::string(jdlv::to_string(tail_penalty));
    j["a0"] = a0;
    j["a_lower"] = a_lower;
    j["a_upper"] = a_upper;
    j["residual_tol"] = residual_tol;
    j["delta"] = delta ? nlohmann::json(*delta) : nlohmann::json(nullptr);
    j["lambda"] = lambda;
    j["vol_iters"] = vol_iters;
    j["tail_iters"] = tail_iters;
    j["outer_max"] = outer_max;
    j["grad_tol"] = grad_tol;
    j["tail_mode"] = std::string(jdlv::to_string(tail_mode));
    j["tail_terms"] = tail_terms;
    j["nu_alpha"] = nu_alpha;
    j["paths"] = paths;
    j["steps"] = steps;
    j["maturities"] = maturities;
    j["put_payoff"] = std::string(jdlv::to_string(put_payoff));
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c = named(j.contains("preset") ? get<std::string>(j, "preset") : std::string("custom"));
    const std::set<std::string> known{"preset", "grid", "r", "S0", "weight_mode", "vol_model", "vol_constant",
                                      "jump_model", "nodes", "noise", "seed", "alpha1", "alpha2", "sobolev",
                                      "sobolev_divide_by_spacing", "tail_penalty", "a0", "a_lower", "a_upper",
                                      "residual_tol", "delta", "lambda", "vol_iters", "tail_iters", "outer_max",
                                      "grad_tol", "tail_mode", "tail_terms", "nu_alpha", "paths", "steps",
                                      "maturities", "put_payoff"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    if (j.contains("grid")) c.grid = grid_from_json(j["grid"]);
    if (j.contains("r")) c.mkt.r = get<double>(j, "r");
    if (j.contains("S0")) c.mkt.S0 = get<double>(j, "S0");
    if (j.contains("weight_mode")) c.scheme.weight_mode = weight_mode_from_string(get<std::string>(j, "weight_mode"));
    if (j.contains("vol_model")) c.vol_model = vol_model_from_string(get<std::string>(j, "vol_model"));
    if (j.contains("vol_constant")) c.vol_constant = get<double>(j, "vol_constant");
    if (j.contains("jump_model")) c.jump_model = jump_model_from_string(get<std::string>(j, "jump_model"));
    if (j.contains("nodes")) c.nodes = node_set_from_string(get<std::string>(j, "nodes"));
    if (j.contains("noise")) c.noise = get<double>(j, "noise");
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
    if (j.contains("alpha1")) c.alpha1 = get<double>(j, "alpha1");
    if (j.contains("alpha2")) c.alpha2 = get<double>(j, "alpha2");
    if (j.contains("sobolev")) {
        const auto& s = j["sobolev"];
        for (const auto& [key, _] : s.items()) {
            if (key != "w0" && key != "wtau" && key != "wy") throw ConfigError("unknown sobolev key '" + key + "'");
        }
        c.sobolev.w0 = s.value("w0", c.sobolev.w0);
        c.sobolev.wtau = s.value("wtau", c.sobolev.wtau);
        c.sobolev.wy = s.value("wy", c.sobolev.wy);
    }
    if (j.contains("sobolev_divide_by_spacing")) c.sobolev_divide_by_spacing = get<bool>(j, "sobolev_divide_by_spacing");
    if (j.contains("tail_penalty")) c.tail_penalty = penalty_kind_from_string(get<std::string>(j, "tail_penalty"));
    if (j.contains("a0")) c.a0 = get<double>(j, "a0");
    if (j.contains("a_lower")) c.a_lower = get<double>(j, "a_lower");
    if (j.contains("a_upper")) c.a_upper = get<double>(j, "a_upper");
    if (j.contains("residual_tol")) c.residual_tol = get<double>(j, "residual_tol");
    if (j.contains("delta")) c.delta = j["delta"].is_null() ? std::nullopt : std::optional(get<double>(j, "delta"));
    if (j.contains("lambda")) c.lambda = get<double>(j, "lambda");
    if (j.contains("vol_iters")) c.vol_iters = get<int>(j, "vol_iters");
    if (j.contains("tail_iters")) c.tail_iters = get<int>(j, "tail_iters");
    if (j.contains("outer_max")) c.outer_max = get<int>(j, "outer_max");
    if (j.contains("grad_tol")) c.grad_tol = get<double>(j, "grad_tol");
    if (j.contains("tail_mode")) c.tail_mode = tail_mode_from_string(get<std::string>(j, "tail_mode"));
    if (j.contains("tail_terms")) c.tail_terms = get<int>(j, "tail_terms");
    if (j.contains("nu_alpha")) c.nu_alpha = get<double>(j, "nu_alpha");
    if (j.contains("paths")) c.paths = get<int>(j, "paths");
    if (j.contains("steps")) c.steps = get<int>(j, "steps");
    if (j.contains("maturities")) c.maturities = get<std::vector<double>>(j, "maturities");
    if (j.contains("put_payoff")) c.put_payoff = put_payoff_from_string(get<std::string>(j, "put_payoff"));
    c.validate();
    return c;
}

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(mkt.S0 > 0.0, "S0 must be positive");
    require(std::isfinite(mkt.r), "r must be finite");
    require(vol_constant > 0.0, "vol_constant must be positive");
    require(noise >= 0.0, "noise must be nonnegative");
    require(alpha1 >= 0.0 && alpha2 >= 0.0, "alpha1 and alpha2 must be nonnegative");
    require(a_lower > 0.0 && a_lower < a_upper, "need 0 < a_lower < a_upper");
    require(a0 >= a_lower && a0 <= a_upper, "a0 must lie in [a_lower, a_upper]");
    require(residual_tol >= 0.0, "residual_tol must be nonnegative");
    require(!delta || *delta >= 0.0, "delta must be nonnegative");
    require(lambda > 1.0, "lambda must exceed 1");
    require(vol_iters >= 0 && tail_iters >= 0 && outer_max >= 1, "iteration limits must be nonnegative, outer_max >= 1");
    require(tail_terms >= 1, "tail_terms must be at least 1");
    require(nu_alpha > 0.0, "nu_alpha must be positive");
    require(paths >= 1 && steps >= 1, "paths and steps must be at least 1");
    for (double t : maturities) require(t > 0.0, "maturities must be positive");
    require(grid.y_min() <= -0.5 && grid.y_max() >= 0.5 && grid.tau_max() >= 1.0 - 1e-12,
            "grid must cover tau in [0, 1] and y in [-0.5, 0.5]");
}

VolSurface true_vol(const RunConfig& cfg) {
    return cfg.vol_model == VolModel::constant ? VolSurface::constant(cfg.grid, cfg.vol_constant)
                                               : reference_vol_surface(cfg.grid);
}

JumpDensity true_jumps(const RunConfig& cfg) {
    switch (cfg.jump_model) {
    case JumpModel::gaussian: return reference_jump_density(cfg.grid);
    case JumpModel::prior: return joint_prior_density(cfg.grid);
    case JumpModel::none: return JumpDensity::zeros(cfg.grid);
    }
    return JumpDensity::zeros(cfg.grid);
}

std::vector<QuoteNode> config_nodes(const RunConfig& cfg) {
    return cfg.nodes == NodeSet::vol ? vol_calibration_nodes(cfg.grid) : joint_calibration_nodes(cfg.grid);
}

QuoteSet synthesize(const RunConfig& cfg) {
    const TailFunction phi = tail_from_density(true_jumps(cfg), cfg.grid);
    return make_quotes(true_vol(cfg), phi, cfg.grid, cfg.mkt, config_nodes(cfg), NoiseSpec{cfg.noise, cfg.seed},
                       cfg.scheme);
}

TikhonovObjective make_objective(const RunConfig& cfg, const QuoteSet& quotes, const TailFunction& tail_prior) {
    TikhonovConfig t;
    t.alpha1 = cfg.alpha1;
    t.alpha2 = cfg.alpha2;
    t.vol_penalty = Penalty::sobolev(VolLattice::quote_lattice(cfg.a0), cfg.sobolev, cfg.sobolev_divide_by_spacing);
    t.tail_penalty = Penalty::tail(cfg.tail_penalty, tail_prior, cfg.grid);
    t.mkt = cfg.mkt;
    t.scheme = cfg.scheme;
    return TikhonovObjective(cfg.grid, quotes, t);
}

DescendOptions vol_options(const RunConfig& cfg) {
    DescendOptions o;
    o.inner.max_iters = cfg.vol_iters;
    o.inner.grad_tol = cfg.grad_tol;
    o.residual_tol = cfg.residual_tol;
    o.delta = cfg.delta;
    o.lambda = cfg.lambda;
    o.a_lower = cfg.a_lower;
    o.a_upper = cfg.a_upper;
    return o;
}

DescendOptions tail_options(const RunConfig& cfg) {
    DescendOptions o = vol_options(cfg);
    o.inner.max_iters = cfg.tail_iters;
    return o;
}

VolRun calibrate_vol(const RunConfig& cfg, const QuoteSet& quotes, const TailFunction& phi) {
    const TailFunction prior = tail_from_density(joint_prior_density(cfg.grid), cfg.grid);
    const TikhonovObjective objective = make_objective(cfg, quotes, prior);
    VolRun run;
    run.a = VolLattice::quote_lattice(cfg.a0);
    run.result = descend_vol(run.a, phi, objective, vol_options(cfg));
    run.a.values = run.result.x;
    return run;
}

SplitRun calibrate_split(const RunConfig& cfg, const QuoteSet& quotes,
                         const std::function<void(const HistoryEntry&)>& progress) {
    const TailFunction prior = tail_from_density(joint_prior_density(cfg.grid), cfg.grid);
    const TikhonovObjective objective = make_objective(cfg, quotes, prior);
    SplitState init;
    init.a = VolLattice::quote_lattice(cfg.a0);
    if (cfg.tail_mode == TailMode::log_fourier) {
        init.tail = fit_log_fourier(prior, cfg.grid, cfg.tail_terms);
    } else {
        init.tail.mode = TailMode::nodal;
        init.tail.nodal = prior.phi;
    }
    SplitConfig sc;
    sc.vol = vol_options(cfg);
    sc.tail = tail_options(cfg);
    sc.outer_max = cfg.outer_max;
    sc.residual_tol = cfg.residual_tol;
    sc.delta = cfg.delta;
    sc.lambda = cfg.lambda;
    sc.progress = progress;
    SplitRun run;
    run.state = split_calibrate(objective, std::move(init), sc);
    const TailEvaluation te = tail_coeffs_to_phi(run.state.tail, cfg.grid);
    run.phi = te.phi;
    run.clamped = te.clamped;
    return run;
}

double sigma_distance(const VolLattice& est, const VolLattice& truth) {
    if (est.values.size() != truth.values.size()) throw ConfigError("lattices differ in size");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < truth.values.size(); ++k) {
        const double st = std::sqrt(2.0 * truth.values[k]);
        const double se = std::sqrt(2.0 * est.values[k]);
        num += (se - st) * (se - st);
        den += st * st;
    }
    return std::sqrt(num / den);
}

double tail_distance(const TailFunction& est, const TailFunction& truth, const Grid& grid) {
    double num = 0.0;
    double den = 0.0;
    for (int c = 0; c < grid.nodes(); ++c) {
        if (c == grid.zero_col()) continue;
        num += (est.phi[c] - truth.phi[c]) * (est.phi[c] - truth.phi[c]);
        den += truth.phi[c] * truth.phi[c];
    }
    return std::sqrt(num / den);
}

double nu_distance(const JumpDensity& est, const JumpDensity& truth, const Grid& grid,
                   const std::vector<double>& excluded) {
    std::set<int> skip;
    for (double y : excluded) skip.insert(grid.col(static_cast<int>(std::lround(y / grid.dy()))));
    double num = 0.0;
    double den = 0.0;
    for (int c = 0; c < grid.nodes(); ++c) {
        if (skip.count(c)) continue;
        num += (est.nu[c] - truth.nu[c]) * (est.nu[c] - truth.nu[c]);
        den += truth.nu[c] * truth.nu[c];
    }
    return std::sqrt(num / den);
}

std::vector<double> lattice_implied_vols(const PriceSurface& u, const Grid& grid, const MarketParams& mkt,
                                         const std::vector<double>& taus, const std::vector<double>& ys) {
    std::vector<double> out;
    out.reserve(taus.size() * ys.size());
    for (double tau : taus) {
        const int i = grid.i_of(tau);
        for (double y : ys) {
            const int c = grid.col(grid.j_of(y));
            try {
                out.push_back(implied_vol(u.u(i, c), y, tau, mkt.r));
            } catch (const OutOfRange&) {
                out.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
    }
    return out;
}

FourierComparison compare_with_fourier(const RunConfig& cfg) {
    if (cfg.vol_model != VolModel::constant) throw ConfigError("the Fourier oracle needs a constant vol surface");
    const JumpDensity nu = true_jumps(cfg);
    const PriceSurface u =
        solve_forward(VolSurface::constant(cfg.grid, cfg.vol_constant), tail_from_density(nu, cfg.grid), cfg.grid,
                      cfg.mkt, cfg.scheme);
    const VolLattice lattice = VolLattice::quote_lattice(cfg.vol_constant);
    const std::vector<double> pide = lattice_implied_vols(u, cfg.grid, cfg.mkt, lattice.taus, lattice.ys);
    const double sigma = std::sqrt(2.0 * cfg.vol_constant);
    FourierComparison out;
    std::size_t k = 0;
    for (double tau : lattice.taus) {
        const FourierResult fr = carr_madan_price(sigma, nu, cfg.grid, tau, lattice.ys, cfg.mkt.r);
        for (std::size_t c = 0; c < lattice.ys.size(); ++c, ++k) {
            double iv = std::numeric_limits<double>::quiet_NaN();
            try {
                iv = implied_vol(fr.prices[c], lattice.ys[c], tau, cfg.mkt.r);
            } catch (const OutOfRange&) {
            }
            if (std::isnan(iv) || std::isnan(pide[k])) continue;
            out.pide_iv.push_back(pide[k]);
            out.fourier_iv.push_back(iv);
        }
    }
    out.stats = compare(out.pide_iv, out.fourier_iv);
    return out;
}

GradientCheck check_gradients(int steps, int nodes, int directions, std::uint64_t seed, const SchemeOptions& scheme,
                              double tol) {
    if (steps < 2 || nodes < 5 || nodes % 2 == 0 || directions < 1)
        throw ConfigError("gradient check needs steps >= 2, an odd node count >= 5, directions >= 1");
    const int J = (nodes - 1) / 2;
    const Grid g = Grid::symmetric(0.5, steps, 1.0, J);
    const MarketParams mkt(0.02, 1.0);
    CounterRng rng(seed, 0);
    auto uniform = [&rng] { return 2.0 * rng.uniform() - 1.0; };

    VolSurface a = VolSurface::constant(g, 0.05);
    const double p1 = uniform();
    const double p2 = uniform();
    for (int i = 0; i < g.levels(); ++i)
        for (int c = 0; c < g.nodes(); ++c)
            a.a(i, c) = 0.05 + 0.01 * std::sin(3.0 * g.y_at_col(c) + p1) * std::cos(2.0 * g.tau(i) + p2);
    TailFunction phi = TailFunction::zeros(g);
    for (int c = 0; c < g.nodes(); ++c)
        if (c != g.zero_col()) phi.phi[c] = 0.05 * std::exp(-std::abs(g.y_at_col(c))) * (1.0 + 0.2 * uniform());

    const PriceSurface u0 = solve_forward(a, phi, g, mkt, scheme);
    std::vector<ResidualNode> quotes;
    for (int i = std::max(1, steps / 5); i <= steps; i += std::max(1, steps / 5))
        for (int j = -J / 2; j <= J / 2; ++j) quotes.push_back({i, j, u0.u(i, g.col(j)) - 0.01 * uniform()});

    auto objective = [&](const VolSurface& av, const TailFunction& pv) {
        const PriceSurface u = solve_forward(av, pv, g, mkt, scheme);
        double s = 0.0;
        for (const ResidualNode& q : quotes) {
            const double r = u.u(q.i, g.col(q.j)) - q.value;
            s += 0.5 * r * r;
        }
        return s;
    };
    Residual res;
    for (const ResidualNode& q : quotes) res.nodes.push_back({q.i, q.j, u0.u(q.i, g.col(q.j)) - q.value});
    const AdjointSurface w = solve_adjoint(a, phi, res, g, mkt, scheme);
    const Surface gv = grad_vol(u0, w, g);
    const std::vector<double> gt = grad_tail(u0, w, g, scheme);

    GradientCheck out;
    const double eps = 1e-6;
    for (int d = 0; d < directions; ++d) {
        Surface h(g.levels(), g.nodes());
        for (int i = 0; i < g.levels(); ++i)
            for (int c = 1; c + 1 < g.nodes(); ++c) h(i, c) = uniform();
        VolSurface ap = a;
        VolSurface am = a;
        double dot = 0.0;
        for (std::size_t k = 0; k < h.values().size(); ++k) {
            ap.a.values()[k] += eps * h.values()[k];
            am.a.values()[k] -= eps * h.values()[k];
            dot += gv.values()[k] * h.values()[k];
        }
        const double fd = (objective(ap, phi) - objective(am, phi)) / (2.0 * eps);
        out.vol_errors.push_back(std::abs(dot - fd) / std::max(std::abs(fd), 1e-300));

        TailFunction pp = phi;
        TailFunction pm = phi;
        double tdot = 0.0;
        for (int c = 0; c < g.nodes(); ++c) {
            if (c == g.zero_col()) continue;
            const double hc = uniform();
            pp.phi[c] += eps * hc;
            pm.phi[c] -= eps * hc;
            tdot += gt[c] * hc;
        }
        const double tfd = (objective(a, pp) - objective(a, pm)) / (2.0 * eps);
        out.tail_errors.push_back(std::abs(tdot - tfd) / std::max(std::abs(tfd), 1e-300));
    }
    for (double e : out.vol_errors) out.max_error = std::max(out.max_error, e);
    for (double e : out.tail_errors) out.max_error = std::max(out.max_error, e);
    out.passed = out.max_error < tol;
    return out;
}

}  // namespace jdlv
