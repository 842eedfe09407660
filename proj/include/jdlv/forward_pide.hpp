/**
 * @file forward_pide.hpp
 * @brief Crank-Nicolson solver for the forward Dupire-type PIDE
 *
 *   u_tau - a (u_yy - u_y) + r u_y = int phi(y - z) (u_yy - u_y)(z) dz,
 *   u(0, y) = max(0, 1 - e^y),
 *
 * on the truncated lattice. The differential part is Crank-Nicolson with
 * central differences; the convolution is explicit (level i-1 only) with a
 * trapezoidal sum. Boundary columns hold the payoff, and the convolution reads
 * the payoff outside the lattice.
 */
#pragma once

#include "jdlv/grid.hpp"
#include "jdlv/levy_tail.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace jdlv {

/// Weight multiplying phi_k inside the discrete convolution.
/// `paper` carries the extra e^{y_k} factor, `plain` is the bare trapezoidal sum.
enum class WeightMode { paper, plain };

std::string_view to_string(WeightMode mode);
WeightMode weight_mode_from_string(std::string_view name);

struct SchemeOptions {
    WeightMode weight_mode = WeightMode::plain;
};

/// Effective convolution weights w_k = phi_k (plain) or phi_k e^{y_k} (paper).
std::vector<double> convolution_weights(const TailFunction& phi, const Grid& grid, WeightMode mode);

/// Jump term M^{i-1}_j for every column. Boundary columns are returned too
/// but the solver never uses them.
std::vector<double> convolution_term(std::span<const double> u_row, const TailFunction& phi, const Grid& grid,
                                     WeightMode mode);

/// Full price surface. Throws NumericalBreakdown on a vanishing Thomas pivot.
PriceSurface solve_forward(const VolSurface& a, const TailFunction& phi, const Grid& grid, const MarketParams& mkt,
                           const SchemeOptions& opts = {});

/**
 * Tangent-linear solve: the exact derivative of solve_forward in direction
 * (da, dphi). Boundary columns and the out-of-lattice extension are fixed, so
 * their derivative is zero.
 */
Surface solve_tangent(const VolSurface& a, const TailFunction& phi, const PriceSurface& u, const Surface& da,
                      std::span<const double> dphi, const Grid& grid, const MarketParams& mkt,
                      const SchemeOptions& opts = {});

/// Thomas algorithm on an n-by-n tridiagonal system; rhs is overwritten with the solution.
/// sub[0] and sup[n-1] are ignored.
void thomas_solve(std::span<const double> sub, std::span<const double> diag, std::span<const double> sup,
                  std::span<double> rhs, int step);

}  // namespace jdlv
