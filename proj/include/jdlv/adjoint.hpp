/**
 * @file adjoint.hpp
 * @brief Adjoint state of the pricing scheme and gradients of the quote misfit
 *
 * For J = 1/2 sum_q r_q^2 with r_q the residual at quote node q, the discrete
 * adjoint lambda solves the transposed time march of the Crank-Nicolson scheme
 * backward from lambda = 0 past the last level:
 *
 *   A_i^T lambda^i = r^i + (B_i + M)^T lambda^{i+1},
 *
 * where A_i, B_i are the implicit and explicit halves of step i and M is the
 * explicit convolution. Gradients with respect to the local variance and the
 * tail follow from the partial derivatives of each step.
 *
 * The continuous mode discretizes the adjoint PIDE
 *
 *   -w_tau = (a w)_yy + (a w)_y + r w_y + int phi(x) (w_yy + w_y)(y + x) dx + source
 *
 * directly and uses the nodewise gradient formulas; it agrees with the discrete
 * mode to discretization order and exists only as a cross-check.
 */
#pragma once

#include "jdlv/forward_pide.hpp"
#include "jdlv/grid.hpp"
#include "jdlv/levy_tail.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace jdlv {

enum class AdjointMode { discrete, continuous };

std::string_view to_string(AdjointMode mode);
AdjointMode adjoint_mode_from_string(std::string_view name);

/// Residual at one quote node, signed index j.
struct ResidualNode {
    int i = 0;
    int j = 0;
    double value = 0.0;
};

/// Gathered model-minus-data values; the adjoint source scatters them unchanged.
struct Residual {
    std::vector<ResidualNode> nodes;

    /// Throws ConfigError on off-grid or duplicate nodes.
    void validate(const Grid& grid) const;
};

struct AdjointSurface {
    Surface w;
    AdjointMode mode = AdjointMode::discrete;
};

AdjointSurface solve_adjoint(const VolSurface& a, const TailFunction& phi, const Residual& residual, const Grid& grid,
                             const MarketParams& mkt, const SchemeOptions& opts = {},
                             AdjointMode mode = AdjointMode::discrete);

/// dJ/da at every node; boundary columns are zero.
Surface grad_vol(const PriceSurface& u, const AdjointSurface& w, const Grid& grid);

/// dJ/dphi_k for every column k (the y = 0 entry is reported but phi_0 is pinned by callers).
std::vector<double> grad_tail(const PriceSurface& u, const AdjointSurface& w, const Grid& grid,
                              const SchemeOptions& opts = {});

}  // namespace jdlv
