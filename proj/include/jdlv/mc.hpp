/**
 * @file mc.hpp
 * @brief Path simulation of the local-volatility jump-diffusion and lookback pricing
 *
 * Log-price Euler steps
 *   X += (r - kappa - sigma^2/2) dt + sigma sqrt(dt) Z + sum of jumps,
 * with sigma = sigma(t, X - X_0), Poisson(Lambda dt) jumps drawn from the lattice
 * measure nu, and kappa = sum_j nu_j E[e^J - 1 | cell j] so that e^{-rt} S_t is a
 * martingale. Jump sizes are uniform within their cell, which is what the
 * piecewise-linear inverse CDF produces.
 */
#pragma once

#include "jdlv/grid.hpp"
#include "jdlv/levy_tail.hpp"
#include "jdlv/synthetic.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace jdlv {

/// sigma as a function of time and log-moneyness y = log(S/S0).
using LocalVol = std::function<double(double t, double y)>;

LocalVol local_vol_from_lattice(const VolLattice& lattice);
LocalVol constant_local_vol(double sigma);

class JumpSampler {
public:
    JumpSampler(const JumpDensity& nu, const Grid& grid);

    double intensity() const { return lambda_; }
    /// sum_j nu_j (E[e^J | cell j] - 1).
    double compensator() const { return kappa_; }
    /// Jump size for a uniform u in (0, 1).
    double sample(double u) const;
    const std::vector<double>& cdf() const { return cdf_; }

private:
    std::vector<double> edges_;  ///< left cell edges of the cells with mass
    std::vector<double> cdf_;    ///< cumulative probability at each right edge
    double width_ = 0.0;
    double lambda_ = 0.0;
    double kappa_ = 0.0;
};

enum class PathScheme { euler_jump, euler_dupire };

std::string_view to_string(PathScheme s);

struct PathConfig {
    int steps = 100;
    int paths = 10000;
    PathScheme scheme = PathScheme::euler_jump;
    std::uint64_t seed = 20240601;
};

/// Terminal value and running extrema (over the N+1 monitoring dates) per path.
struct PathEnsemble {
    double tau = 0.0;
    double S0 = 1.0;
    std::vector<double> terminal;
    std::vector<double> running_min;
    std::vector<double> running_max;
};

/**
 * Simulates cfg.paths paths to maturity tau with dt = tau / cfg.steps. Diffusion
 * and jump draws come from separate counter streams keyed by (seed, tau, path), so
 * models sharing a seed see common random numbers. euler_dupire ignores nu.
 */
PathEnsemble simulate_paths(const LocalVol& sigma, const JumpSampler* jumps, double tau, const PathConfig& cfg,
                            const MarketParams& mkt);

enum class LookbackKind { call, put };
/// put_verbatim pays max(0, max_k S_k); put_vs_terminal pays max(0, max_k S_k - S_tau).
enum class PutPayoff { verbatim, vs_terminal };

std::string_view to_string(PutPayoff p);
PutPayoff put_payoff_from_string(std::string_view name);

struct McPrice {
    double price = 0.0;
    double std_error = 0.0;
};

McPrice lookback_price(LookbackKind kind, const PathEnsemble& ens, double r, PutPayoff put = PutPayoff::vs_terminal);

/// Discounted mean of S_tau with its standard error.
McPrice discounted_terminal_mean(const PathEnsemble& ens, double r);

/// Plain European call e^{-r tau} E[max(S_tau - K, 0)].
McPrice european_call(const PathEnsemble& ens, double strike, double r);

struct ModelSpec {
    LocalVol sigma;
    std::optional<JumpDensity> nu;  ///< empty for the pure-diffusion model
};

struct LookbackTables {
    std::vector<double> maturities;
    PutPayoff put_payoff = PutPayoff::vs_terminal;
    std::vector<McPrice> call_jump, call_dupire, call_true;
    std::vector<McPrice> put_jump, put_dupire, put_true;
    std::vector<double> call_err_jump, call_err_dupire;
    std::vector<double> put_err_jump, put_err_dupire;
    bool call_ranking_holds = false;  ///< jump-model call error below the diffusion-only one at every maturity
};

LookbackTables lookback_tables(const ModelSpec& jump_model, const ModelSpec& dupire_model, const ModelSpec& truth,
                               const Grid& grid, const std::vector<double>& maturities, const PathConfig& cfg,
                               const MarketParams& mkt, PutPayoff put = PutPayoff::vs_terminal);

}  // namespace jdlv
