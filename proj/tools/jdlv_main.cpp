// jdlv: command-line front end for pricing, calibration, synthetic data and Monte Carlo tables.
#include "jdlv/errors.hpp"
#include "jdlv/io.hpp"
#include "jdlv/workflows.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace jdlv;

namespace {

enum Exit { ok = 0, config_error = 2, breakdown = 3, not_converged = 4 };

struct Common {
    std::string config_path;
    std::string preset;
    std::string out = ".";
    std::string weight_mode;
    std::optional<std::uint64_t> seed;
    bool emit_plots = false;
};

RunConfig resolve(const Common& c) {
    nlohmann::json j = nlohmann::json::object();
    if (!c.config_path.empty()) {
        std::ifstream in(c.config_path);
        if (!in) throw ConfigError("cannot read config " + c.config_path);
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config " + c.config_path + ": " + e.what());
        }
    }
    if (!c.preset.empty()) j["preset"] = c.preset;
    if (!c.weight_mode.empty()) j["weight_mode"] = c.weight_mode;
    if (c.seed) j["seed"] = *c.seed;
    return RunConfig::from_json(j);
}

fs::path out_path(const Common& c, const std::string& name) { return fs::path(c.out) / name; }

VolSurface load_vol(const std::string& path, const RunConfig& cfg) {
    if (path.empty()) return true_vol(cfg);
    std::ifstream in(path);
    std::string line;
    bool surface = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        surface = line.rfind("grid", 0) == 0;
        break;
    }
    if (!surface) return interpolate_vol(read_lattice(path), cfg.grid);
    SurfaceFile f = read_surface(path);
    if (!(f.grid == cfg.grid)) throw ConfigError(path + ": grid differs from the configured grid");
    return VolSurface{std::move(f.values)};
}

TailFunction load_tail(const std::string& tail_path, const std::string& nu_path, const RunConfig& cfg) {
    if (!tail_path.empty() && !nu_path.empty()) throw ConfigError("give either --tail or --nu, not both");
    auto checked = [&cfg](const std::string& p) {
        NodalFile f = read_nodal(p);
        if (!(f.grid == cfg.grid)) throw ConfigError(p + ": grid differs from the configured grid");
        return f.values;
    };
    if (!tail_path.empty()) return TailFunction{checked(tail_path)};
    if (!nu_path.empty()) return tail_from_density(JumpDensity{checked(nu_path)}, cfg.grid);
    return tail_from_density(true_jumps(cfg), cfg.grid);
}

QuoteSet load_quotes(const std::string& path, const RunConfig& cfg) {
    QuoteSet q = path.empty() ? synthesize(cfg) : read_quotes(path);
    q.validate(cfg.grid, cfg.mkt);
    return q;
}

void write_smiles(const fs::path& path, const PriceSurface& u, const PriceSurface* reference, const RunConfig& cfg) {
    const VolLattice lat = VolLattice::quote_lattice(0.0);
    const auto model = lattice_implied_vols(u, cfg.grid, cfg.mkt, lat.taus, lat.ys);
    std::vector<double> ref;
    if (reference) ref = lattice_implied_vols(*reference, cfg.grid, cfg.mkt, lat.taus, lat.ys);
    std::ofstream out(path, std::ios::binary);
    out << "# version: " << version_string() << "\n# config: " << cfg.to_json().dump() << "\n";
    out << "tau,y,implied_vol" << (reference ? ",implied_vol_true" : "") << "\n";
    std::size_t k = 0;
    for (double tau : lat.taus)
        for (double y : lat.ys) {
            out << format_number(tau) << "," << format_number(y) << "," << format_number(model[k]);
            if (reference) out << "," << format_number(ref[k]);
            out << "\n";
            ++k;
        }
}

void write_slices(const fs::path& path, const VolLattice& est, const VolLattice& truth, const RunConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    out << "# version: " << version_string() << "\n# config: " << cfg.to_json().dump() << "\n";
    out << "tau,y,sigma,sigma_true\n";
    for (std::size_t r = 0; r < est.rows(); ++r)
        for (std::size_t c = 0; c < est.cols(); ++c)
            out << format_number(est.taus[r]) << "," << format_number(est.ys[c]) << ","
                << format_number(std::sqrt(2.0 * est.at(r, c))) << "," << format_number(std::sqrt(2.0 * truth.at(r, c)))
                << "\n";
}

void write_tail_curves(const fs::path& path, const TailFunction& phi, const TailFunction& phi_true,
                       const JumpDensity* nu, const JumpDensity& nu_true, const RunConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    out << "# version: " << version_string() << "\n# config: " << cfg.to_json().dump() << "\n";
    out << "y,phi,phi_true" << (nu ? ",nu" : "") << ",nu_true\n";
    for (int c = 0; c < cfg.grid.nodes(); ++c) {
        out << format_number(cfg.grid.y_at_col(c)) << "," << format_number(phi.phi[c]) << ","
            << format_number(phi_true.phi[c]);
        if (nu) out << "," << format_number(nu->nu[c]);
        out << "," << format_number(nu_true.nu[c]) << "\n";
    }
}

nlohmann::json history_json(const std::vector<double>& residuals, const DescendResult& r) {
    return {{"iterations", r.inner.iterations},
            {"evaluations", r.inner.evaluations},
            {"exit", static_cast<int>(r.inner.exit)},
            {"objective", r.inner.values},
            {"normalized_residual", residuals},
            {"final_misfit", r.final.misfit},
            {"final_normalized_residual", r.final.normalized_residual},
            {"final_vol_penalty", r.final.vol_penalty},
            {"final_tail_penalty", r.final.tail_penalty}};
}

int cmd_synth(const Common& c) {
    const RunConfig cfg = resolve(c);
    const nlohmann::json conf = cfg.to_json();
    const QuoteSet q = synthesize(cfg);
    write_quotes(out_path(c, "quotes.csv"), q, conf);
    write_surface(out_path(c, "vol_true.csv"), cfg.grid, true_vol(cfg).a, conf);
    write_lattice(out_path(c, "vol_lattice_true.csv"), VolLattice::sample(true_vol(cfg), cfg.grid,
                                                                           VolLattice::quote_lattice(0).taus,
                                                                           VolLattice::quote_lattice(0).ys),
                  conf);
    const JumpDensity nu = true_jumps(cfg);
    write_nodal(out_path(c, "nu_true.csv"), cfg.grid, nu.nu, "nu", conf);
    write_nodal(out_path(c, "tail_true.csv"), cfg.grid, tail_from_density(nu, cfg.grid).phi, "phi", conf);
    const JumpDensity prior = joint_prior_density(cfg.grid);
    write_nodal(out_path(c, "nu_prior.csv"), cfg.grid, prior.nu, "nu", conf);
    std::printf("wrote %zu quotes to %s\n", q.size(), out_path(c, "quotes.csv").string().c_str());
    return ok;
}

int cmd_price(const Common& c, const std::string& vol, const std::string& tail, const std::string& nu) {
    const RunConfig cfg = resolve(c);
    const nlohmann::json conf = cfg.to_json();
    const VolSurface a = load_vol(vol, cfg);
    const TailFunction phi = load_tail(tail, nu, cfg);
    const PriceSurface u = solve_forward(a, phi, cfg.grid, cfg.mkt, cfg.scheme);
    write_surface(out_path(c, "prices.csv"), cfg.grid, u.u, conf);
    const VolLattice lat = VolLattice::quote_lattice(0.0);
    VolLattice iv{lat.taus, lat.ys, lattice_implied_vols(u, cfg.grid, cfg.mkt, lat.taus, lat.ys)};
    write_lattice(out_path(c, "implied_vol.csv"), iv, conf);
    if (c.emit_plots) write_smiles(out_path(c, "plot_smiles.csv"), u, nullptr, cfg);
    std::printf("priced %d x %d surface\n", cfg.grid.levels(), cfg.grid.nodes());
    return ok;
}

int cmd_implied_vol(const Common& c, const std::string& input) {
    const RunConfig cfg = resolve(c);
    const nlohmann::json conf = cfg.to_json();
    if (input.empty()) throw ConfigError("--input is required");
    std::ifstream in(input);
    std::string line;
    bool surface = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        surface = line.rfind("grid", 0) == 0;
        break;
    }
    if (surface) {
        SurfaceFile f = read_surface(input);
        const VolLattice lat = VolLattice::quote_lattice(0.0);
        VolLattice iv{lat.taus, lat.ys, lattice_implied_vols(PriceSurface{f.values}, f.grid, cfg.mkt, lat.taus, lat.ys)};
        write_lattice(out_path(c, "implied_vol.csv"), iv, conf);
        return ok;
    }
    QuoteSet q = read_quotes(input);
    int failed = 0;
    for (Quote& x : q.quotes) {
        try {
            x.implied_vol = implied_vol(x.price, x.y, x.tau, cfg.mkt.r);
        } catch (const OutOfRange&) {
            x.implied_vol = std::numeric_limits<double>::quiet_NaN();
            ++failed;
        }
    }
    write_quotes(out_path(c, "implied_vol.csv"), q, conf);
    if (failed) std::fprintf(stderr, "%d quotes outside the no-arbitrage band (implied_vol = nan)\n", failed);
    return ok;
}

int cmd_calibrate_vol(const Common& c, const std::string& quotes, const std::string& tail, const std::string& nu) {
    const RunConfig cfg = resolve(c);
    const nlohmann::json conf = cfg.to_json();
    const QuoteSet q = load_quotes(quotes, cfg);
    const TailFunction phi = load_tail(tail, nu, cfg);
    const VolRun run = calibrate_vol(cfg, q, phi);
    write_lattice(out_path(c, "vol_lattice.csv"), run.a, conf);
    const bool converged = run.result.inner.exit == DescentExit::converged ||
                           (cfg.residual_tol > 0.0 && run.result.final.normalized_residual < cfg.residual_tol) ||
                           run.result.inner.exit == DescentExit::stopped_by_rule;
    nlohmann::json doc = history_json(run.result.residuals, run.result);
    doc["converged"] = converged;
    const VolLattice truth = VolLattice::sample(true_vol(cfg), cfg.grid, run.a.taus, run.a.ys);
    if (quotes.empty()) doc["sigma_distance_to_truth"] = sigma_distance(run.a, truth);
    write_json(out_path(c, "history.json"), doc, conf);
    if (c.emit_plots) {
        const PriceSurface u = solve_forward(interpolate_vol(run.a, cfg.grid), phi, cfg.grid, cfg.mkt, cfg.scheme);
        const PriceSurface ut = solve_forward(true_vol(cfg), tail_from_density(true_jumps(cfg), cfg.grid), cfg.grid,
                                              cfg.mkt, cfg.scheme);
        write_smiles(out_path(c, "plot_smiles.csv"), u, &ut, cfg);
        write_slices(out_path(c, "plot_vol_slices.csv"), run.a, truth, cfg);
    }
    std::printf("iterations %d  normalized residual %.6g  %s\n", run.result.inner.iterations,
                run.result.final.normalized_residual, converged ? "converged" : "NOT CONVERGED");
    return converged ? ok : not_converged;
}

JumpDensity recover_nu(const TailFunction& phi, const RunConfig& cfg, RecoverResult* detail) {
    RecoverResult r = recover_density(phi, joint_prior_density(cfg.grid), cfg.nu_alpha, cfg.grid);
    if (detail) *detail = r;
    return r.nu;
}

int cmd_calibrate_split(const Common& c, const std::string& quotes) {
    const RunConfig cfg = resolve(c);
    const nlohmann::json conf = cfg.to_json();
    const QuoteSet q = load_quotes(quotes, cfg);
    const SplitRun run = calibrate_split(cfg, q, [](const HistoryEntry& h) {
        std::fprintf(stderr, "outer %d %s: %d iterations, objective %.6g, residual %.6g\n", h.outer,
                     std::string(to_string(h.block)).c_str(), h.inner_iterations, h.objective, h.normalized_residual);
    });
    RecoverResult rec;
    const JumpDensity nu = recover_nu(run.phi, cfg, &rec);
    write_lattice(out_path(c, "vol_lattice.csv"), run.state.a, conf);
    write_nodal(out_path(c, "tail.csv"), cfg.grid, run.phi.phi, "phi", conf);
    write_nodal(out_path(c, "nu.csv"), cfg.grid, nu.nu, "nu", conf);

    const double residual = run.state.history.empty() ? run.state.initial_residual
                                                      : run.state.history.back().normalized_residual;
    const bool converged = run.state.stop != SplitStop::outer_max;
    nlohmann::json hist = nlohmann::json::array();
    for (const HistoryEntry& h : run.state.history)
        hist.push_back({{"outer", h.outer},
                        {"block", std::string(to_string(h.block))},
                        {"inner_iterations", h.inner_iterations},
                        {"inner_exit", static_cast<int>(h.inner_exit)},
                        {"objective", h.objective},
                        {"misfit", h.misfit},
                        {"normalized_residual", h.normalized_residual},
                        {"vol_penalty", h.vol_penalty},
                        {"tail_penalty", h.tail_penalty},
                        {"grad_norm", h.grad_norm}});
    nlohmann::json doc{{"history", hist},
                       {"initial_objective", run.state.initial_objective},
                       {"initial_residual", run.state.initial_residual},
                       {"outer_iterations", run.state.outer_iter},
                       {"stop", std::string(to_string(run.state.stop))},
                       {"normalized_residual", residual},
                       {"monotone", run.state.monotone},
                       {"stalled", run.state.stalled},
                       {"tail_clamped", run.clamped},
                       {"converged", converged},
                       {"nu_recovery_residual", rec.normalized_residual},
                       {"files", {{"vol", "vol_lattice.csv"}, {"tail", "tail.csv"}, {"nu", "nu.csv"}}}};
    const TailFunction phi_true = tail_from_density(true_jumps(cfg), cfg.grid);
    const VolLattice truth = VolLattice::sample(true_vol(cfg), cfg.grid, run.state.a.taus, run.state.a.ys);
    if (quotes.empty()) {
        doc["sigma_distance_to_truth"] = sigma_distance(run.state.a, truth);
        doc["tail_distance_to_truth"] = tail_distance(run.phi, phi_true, cfg.grid);
    }
    write_json(out_path(c, "history.json"), doc, conf);
    if (c.emit_plots) {
        const PriceSurface u = solve_forward(interpolate_vol(run.state.a, cfg.grid), run.phi, cfg.grid, cfg.mkt,
                                             cfg.scheme);
        const PriceSurface ut = solve_forward(true_vol(cfg), phi_true, cfg.grid, cfg.mkt, cfg.scheme);
        write_smiles(out_path(c, "plot_smiles.csv"), u, &ut, cfg);
        write_slices(out_path(c, "plot_vol_slices.csv"), run.state.a, truth, cfg);
        const JumpDensity nt = true_jumps(cfg);
        write_tail_curves(out_path(c, "plot_tail.csv"), run.phi, phi_true, &nu, nt, cfg);
    }
    std::printf("outer iterations %d  stop %s  normalized residual %.6g\n", run.state.outer_iter,
                std::string(to_string(run.state.stop)).c_str(), residual);
    return converged ? ok : not_converged;
}

int cmd_recover_nu(const Common& c, const std::string& tail) {
    const RunConfig cfg = resolve(c);
    const nlohmann::json conf = cfg.to_json();
    TailFunction phi;
    if (tail.empty()) {
        phi = tail_from_density(true_jumps(cfg), cfg.grid);
    } else {
        NodalFile f = read_nodal(tail);
        if (!(f.grid == cfg.grid)) throw ConfigError(tail + ": grid differs from the configured grid");
        phi.phi = std::move(f.values);
    }
    RecoverResult rec;
    const JumpDensity nu = recover_nu(phi, cfg, &rec);
    write_nodal(out_path(c, "nu.csv"), cfg.grid, nu.nu, "nu", conf);
    write_json(out_path(c, "recover.json"),
               {{"misfit", rec.misfit},
                {"normalized_residual", rec.normalized_residual},
                {"grad_norm", rec.grad_norm},
                {"iterations", rec.iterations},
                {"converged", rec.converged}},
               conf);
    if (c.emit_plots) {
        const JumpDensity nt = true_jumps(cfg);
        write_tail_curves(out_path(c, "plot_tail.csv"), tail_from_density(nu, cfg.grid), phi, &nu, nt, cfg);
    }
    std::printf("iterations %d  normalized residual %.6g\n", rec.iterations, rec.normalized_residual);
    return rec.converged ? ok : not_converged;
}

int cmd_mc(const Common& c, const std::string& jump_vol, const std::string& jump_nu, const std::string& dupire_vol) {
    const RunConfig cfg = resolve(c);
    const nlohmann::json conf = cfg.to_json();
    if (jump_vol.empty() || jump_nu.empty() || dupire_vol.empty())
        throw ConfigError("--jump-vol, --jump-nu and --dupire-vol are required");
    NodalFile nf = read_nodal(jump_nu);
    if (!(nf.grid == cfg.grid)) throw ConfigError(jump_nu + ": grid differs from the configured grid");
    const ModelSpec jump{local_vol_from_lattice(read_lattice(jump_vol)), JumpDensity{nf.values}};
    const ModelSpec dupire{local_vol_from_lattice(read_lattice(dupire_vol)), std::nullopt};
    const ModelSpec truth{[](double t, double y) { return reference_sigma(t, y); }, true_jumps(cfg)};
    PathConfig pc;
    pc.paths = cfg.paths;
    pc.steps = cfg.steps;
    pc.seed = cfg.seed;
    const LookbackTables t = lookback_tables(jump, dupire, truth, cfg.grid, cfg.maturities, pc, cfg.mkt, cfg.put_payoff);
    auto table = [&](const std::string& name, const std::vector<McPrice>& a, const std::vector<McPrice>& b,
                     const std::vector<McPrice>& tr) {
        std::ofstream out(out_path(c, name), std::ios::binary);
        out << "# version: " << version_string() << "\n# config: " << conf.dump() << "\n";
        out << "tau,jumps,jumps_se,dupire,dupire_se,true,true_se\n";
        for (std::size_t k = 0; k < t.maturities.size(); ++k)
            out << format_number(t.maturities[k]) << "," << format_number(a[k].price) << ","
                << format_number(a[k].std_error) << "," << format_number(b[k].price) << ","
                << format_number(b[k].std_error) << "," << format_number(tr[k].price) << ","
                << format_number(tr[k].std_error) << "\n";
    };
    auto errors = [&](const std::string& name, const std::vector<double>& a, const std::vector<double>& b) {
        std::ofstream out(out_path(c, name), std::ios::binary);
        out << "# version: " << version_string() << "\n# config: " << conf.dump() << "\n";
        out << "tau,jumps,dupire\n";
        for (std::size_t k = 0; k < t.maturities.size(); ++k)
            out << format_number(t.maturities[k]) << "," << format_number(a[k]) << "," << format_number(b[k]) << "\n";
    };
    table("lookback_call_prices.csv", t.call_jump, t.call_dupire, t.call_true);
    table("lookback_put_prices.csv", t.put_jump, t.put_dupire, t.put_true);
    errors("lookback_call_errors.csv", t.call_err_jump, t.call_err_dupire);
    errors("lookback_put_errors.csv", t.put_err_jump, t.put_err_dupire);
    std::printf("put payoff %s; jump model beats diffusion on calls at every maturity: %s\n",
                std::string(to_string(t.put_payoff)).c_str(), t.call_ranking_holds ? "yes" : "no");
    return ok;
}

int cmd_oracle_fourier(const Common& c) {
    const RunConfig cfg = resolve(c);
    const nlohmann::json conf = cfg.to_json();
    if (cfg.vol_model != VolModel::constant) throw ConfigError("oracle-fourier needs vol_model = constant (preset table1)");
    const JumpDensity nu = true_jumps(cfg);
    const VolLattice lat = VolLattice::quote_lattice(0.0);
    const double sigma = std::sqrt(2.0 * cfg.vol_constant);
    QuoteSet q;
    for (double tau : lat.taus) {
        const FourierResult fr = carr_madan_price(sigma, nu, cfg.grid, tau, lat.ys, cfg.mkt.r);
        for (std::size_t k = 0; k < lat.ys.size(); ++k) {
            Quote x{tau, lat.ys[k], fr.prices[k], std::nullopt, 1.0};
            try {
                x.implied_vol = implied_vol(x.price, x.y, tau, cfg.mkt.r);
            } catch (const OutOfRange&) {
                x.implied_vol = std::numeric_limits<double>::quiet_NaN();
            }
            q.quotes.push_back(x);
        }
    }
    write_quotes(out_path(c, "fourier.csv"), q, conf);
    const FourierComparison cmp = compare_with_fourier(cfg);
    write_json(out_path(c, "fourier_comparison.json"),
               {{"normalized_distance", cmp.stats.normalized_distance},
                {"mean_abs_rel", cmp.stats.mean_abs_rel},
                {"std_abs_rel", cmp.stats.std_abs_rel},
                {"count", cmp.stats.count}},
               conf);
    std::printf("implied-vol distance to the finite-difference scheme %.6g (mean abs rel %.6g)\n",
                cmp.stats.normalized_distance, cmp.stats.mean_abs_rel);
    return ok;
}

int cmd_check_gradients(const Common& c, const std::string& spec, int directions) {
    const RunConfig cfg = resolve(c);
    int steps = 0;
    int nodes = 0;
    char x = 0;
    std::istringstream in(spec);
    if (!(in >> steps >> x >> nodes) || x != 'x') throw ConfigError("--grid expects STEPSxNODES, e.g. 20x41");
    const GradientCheck g = check_gradients(steps, nodes, directions, cfg.seed, cfg.scheme);
    for (std::size_t k = 0; k < g.vol_errors.size(); ++k)
        std::printf("direction %zu: vol rel err %.3e  tail rel err %.3e\n", k, g.vol_errors[k], g.tail_errors[k]);
    std::printf("max relative error %.3e: %s\n", g.max_error, g.passed ? "PASS" : "FAIL");
    return g.passed ? ok : breakdown;
}

int cmd_quotes_import(const Common& c, const std::string& input, double S0, double r, const std::string& date,
                      bool snap) {
    RunConfig cfg = resolve(c);
    cfg.mkt.S0 = S0;
    cfg.mkt.r = r;
    ImportOptions o;
    o.S0 = S0;
    o.r = r;
    if (!date.empty()) o.valuation_date = date;
    if (snap) o.snap = cfg.grid;
    const ImportResult res = import_market_quotes(input, o);
    for (const std::string& m : res.rejected) std::fprintf(stderr, "rejected %s\n", m.c_str());
    write_quotes(out_path(c, "quotes.csv"), res.quotes, cfg.to_json());
    std::printf("imported %zu quotes, rejected %zu\n", res.quotes.size(), res.rejected.size());
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local-volatility jump-diffusion pricing and calibration"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);
    Common common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON run configuration");
        sub->add_option("--preset", common.preset, "table1, sec71, sec72, sec73 or custom");
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--weight-mode", common.weight_mode, "convolution weights: plain or paper");
        sub->add_option("--seed", common.seed, "random seed");
        sub->add_flag("--emit-plots", common.emit_plots, "write per-figure CSVs");
    };

    std::string vol, tail, nu, quotes, input, grid_spec = "20x41", date, jump_vol, jump_nu, dupire_vol;
    int directions = 5;
    double S0 = 1.0;
    double r = 0.0;
    bool snap = false;

    auto* synth = app.add_subcommand("synth", "write reference surfaces, densities and quotes");
    add_common(synth);
    auto* price = app.add_subcommand("price", "solve the forward equation");
    add_common(price);
    price->add_option("--vol", vol, "vol surface or lattice CSV (default: configured truth)");
    price->add_option("--tail", tail, "nodal tail CSV");
    price->add_option("--nu", nu, "nodal jump density CSV");
    auto* iv = app.add_subcommand("implied-vol", "implied volatilities of a price surface or quote file");
    add_common(iv);
    iv->add_option("--input", input, "price surface or quotes CSV")->required();
    auto* cv = app.add_subcommand("calibrate-vol", "vol-only Tikhonov calibration");
    add_common(cv);
    cv->add_option("--quotes", quotes, "quotes CSV (default: synthesize from the config)");
    cv->add_option("--tail", tail, "fixed tail CSV");
    cv->add_option("--nu", nu, "fixed jump density CSV");
    auto* cs = app.add_subcommand("calibrate-split", "joint vol and tail calibration by splitting");
    add_common(cs);
    cs->add_option("--quotes", quotes, "quotes CSV (default: synthesize from the config)");
    auto* rn = app.add_subcommand("recover-nu", "jump density from a tail function");
    add_common(rn);
    rn->add_option("--tail", tail, "nodal tail CSV (default: configured truth)");
    auto* mc = app.add_subcommand("mc-exotics", "lookback price tables by Monte Carlo");
    add_common(mc);
    mc->add_option("--jump-vol", jump_vol, "vol lattice of the jump model")->required();
    mc->add_option("--jump-nu", jump_nu, "jump density of the jump model")->required();
    mc->add_option("--dupire-vol", dupire_vol, "vol lattice of the pure-diffusion model")->required();
    auto* of = app.add_subcommand("oracle-fourier", "Fourier reference prices for constant vol");
    add_common(of);
    auto* cg = app.add_subcommand("check-gradients", "adjoint gradients against finite differences");
    add_common(cg);
    cg->add_option("--grid", grid_spec, "STEPSxNODES");
    cg->add_option("--directions", directions, "random directions per block");
    auto* qi = app.add_subcommand("quotes-import", "convert a strike/expiry export to a quote CSV");
    add_common(qi);
    qi->add_option("--input", input, "market CSV with strike, price and expiry or days")->required();
    qi->add_option("--S0", S0, "spot")->required();
    qi->add_option("--r", r, "interest rate");
    qi->add_option("--valuation-date", date, "YYYY-MM-DD");
    qi->add_flag("--snap", snap, "snap quotes to the configured grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        fs::create_directories(common.out);
        if (synth->parsed()) return cmd_synth(common);
        if (price->parsed()) return cmd_price(common, vol, tail, nu);
        if (iv->parsed()) return cmd_implied_vol(common, input);
        if (cv->parsed()) return cmd_calibrate_vol(common, quotes, tail, nu);
        if (cs->parsed()) return cmd_calibrate_split(common, quotes);
        if (rn->parsed()) return cmd_recover_nu(common, tail);
        if (mc->parsed()) return cmd_mc(common, jump_vol, jump_nu, dupire_vol);
        if (of->parsed()) return cmd_oracle_fourier(common);
        if (cg->parsed()) return cmd_check_gradients(common, grid_spec, directions);
        if (qi->parsed()) return cmd_quotes_import(common, input, S0, r, date, snap);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config_error;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config_error;
    } catch (const NumericalBreakdown& e) {
        std::fprintf(stderr, "numerical breakdown: %s\n", e.what());
        return breakdown;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return config_error;
    }
    return ok;
}
