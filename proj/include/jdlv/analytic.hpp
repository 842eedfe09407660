/**
 * @file analytic.hpp
 * @brief Black-Scholes closed form, implied-vol inversion, and a Carr-Madan
 *        Fourier pricer for constant volatility with lattice jumps
 *
 * All prices are normalized: spot 1, strike e^y.
 */
#pragma once

#include "jdlv/grid.hpp"
#include "jdlv/levy_tail.hpp"

#include <span>
#include <vector>

namespace jdlv {

/// Standard normal CDF.
double norm_cdf(double x);

/// Normalized Black-Scholes call. tau <= 0 returns payoff(y).
double bs_price(double y, double tau, double sigma, double r);

/// d price / d sigma.
double bs_vega(double y, double tau, double sigma, double r);

/// Bisection on [1e-6, 5] (60 halvings) followed by 3 Newton polish steps.
/// Throws OutOfRange when price is outside (max(0, 1 - e^{y - r tau}), 1).
double implied_vol(double price, double y, double tau, double r);

/// Normalized distance and absolute relative error statistics of a against reference b.
struct ComparisonStats {
    double normalized_distance = 0.0;  ///< ||a - b|| / ||b||
    double mean_abs_rel = 0.0;
    double std_abs_rel = 0.0;
    std::size_t count = 0;
};

ComparisonStats compare(std::span<const double> a, std::span<const double> b);

struct FourierOptions {
    double damping = 0.75;
    /// Tried in order when the default damping does not give an admissible price.
    std::vector<double> fallback_damping{0.25, 0.5, 1.5};
    double refinement_tol = 1e-10;
    int max_refinements = 10;
};

struct FourierResult {
    std::vector<double> prices;
    double damping_used = 0.0;
    double last_change = 0.0;  ///< max price change in the final refinement
    double xi_max = 0.0;
    double xi_step = 0.0;
};

/**
 * Damped-call Fourier prices at log-moneyness nodes ys for one maturity.
 * The log-price has characteristic exponent
 *   psi(xi) = i xi (r + w) - sigma^2 xi^2 / 2 + sum_j nu_j (e^{i xi y_j} - 1),
 *   w = -sigma^2/2 - sum_j nu_j (e^{y_j} - 1),
 * so discounted spot is a martingale. The frequency grid is doubled in range and
 * halved in step until prices move less than refinement_tol.
 */
FourierResult carr_madan_price(double sigma, const JumpDensity& nu, const Grid& grid, double tau,
                               std::span<const double> ys, double r, const FourierOptions& opts = {});

/// Same, rejecting non-constant vol surfaces with ConfigError.
FourierResult carr_madan_price(const VolSurface& a, const JumpDensity& nu, const Grid& grid, double tau,
                               std::span<const double> ys, double r, const FourierOptions& opts = {});

}  // namespace jdlv
