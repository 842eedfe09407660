/**
 * @file synthetic.hpp
 * @brief Quote sets, the reference test surfaces and jump densities, and the
 *        coarse-lattice volatility parametrization
 */
#pragma once

#include "jdlv/forward_pide.hpp"
#include "jdlv/grid.hpp"
#include "jdlv/levy_tail.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jdlv {

struct Quote {
    double tau = 0.0;
    double y = 0.0;
    double price = 0.0;
    std::optional<double> implied_vol;
    double weight = 1.0;
};

enum class Provenance { synthetic, market };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view name);

struct QuoteSet {
    std::vector<Quote> quotes;
    Provenance provenance = Provenance::synthetic;
    std::optional<double> noise;  ///< relative noise level delta when known
    std::uint64_t seed = 0;

    std::size_t size() const { return quotes.size(); }
    std::vector<double> prices() const;

    /// Checks unique nodes, on-grid coordinates, and the price band
    /// (max(0, 1 - e^{y - r tau}) - 1e-9, 1). Throws ConfigError listing offenders.
    void validate(const Grid& grid, const MarketParams& mkt) const;
};

/// Grid node of a quote: level i and signed space index j.
struct QuoteNode {
    int i = 0;
    int j = 0;
};

/// Snaps quotes to grid nodes (rejecting offsets beyond 1e-9 of a step).
std::vector<QuoteNode> quote_nodes(const QuoteSet& quotes, const Grid& grid);

/// Nodes (i * 0.1, j * 0.05) for i = 1..10 and j = j_lo..j_hi, as grid indices.
std::vector<QuoteNode> sparse_nodes(const Grid& grid, int j_lo, int j_hi);

/// Vol-only calibration set: j = -10..10, 210 nodes.
std::vector<QuoteNode> vol_calibration_nodes(const Grid& grid);

/// Joint calibration set: j = -90..10, 1010 nodes.
std::vector<QuoteNode> joint_calibration_nodes(const Grid& grid);

/// sigma(tau, y) = 2/5 - (4/25) e^{-tau/2} cos(4 pi y / 5) for |y| <= 2/5, else 2/5.
double reference_sigma(double tau, double y);

/// a = sigma^2 / 2 of reference_sigma on every node.
VolSurface reference_vol_surface(const Grid& grid);

/// (0.1 / sqrt(2 pi)) e^{-x^2/2}.
double reference_jump_pdf(double x);
JumpDensity reference_jump_density(const Grid& grid);

/// 0.5 e^{-x^2/2 - x/2} on [0, 5] and 0.5 e^{-x^2/2 - |x|/2} on [-5, 0).
double joint_prior_pdf(double x);
JumpDensity joint_prior_density(const Grid& grid);

struct NoiseSpec {
    double delta = 0.0;  ///< ||noise|| / ||clean||; 0 means no noise
    std::uint64_t seed = 0;
};

/// Solves forward, gathers the nodes, and optionally perturbs prices by scaled
/// Gaussian noise clamped to the arbitrage band.
QuoteSet make_quotes(const VolSurface& a, const TailFunction& phi, const Grid& grid, const MarketParams& mkt,
                     const std::vector<QuoteNode>& nodes, const NoiseSpec& noise = {},
                     const SchemeOptions& opts = {});

/**
 * Local variance on a coarse rectangular (tau, y) lattice. Off the lattice the
 * value is held constant in y beyond the first and last columns and constant in
 * tau before the first row; inside it is bilinear.
 */
struct VolLattice {
    std::vector<double> taus;
    std::vector<double> ys;
    std::vector<double> values;  ///< row-major, taus.size() x ys.size()

    std::size_t rows() const { return taus.size(); }
    std::size_t cols() const { return ys.size(); }
    double& at(std::size_t r, std::size_t c) { return values[r * ys.size() + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * ys.size() + c]; }

    /// tau = 0.1..1 step 0.1, y = -0.5..0.5 step 0.05, filled with value.
    static VolLattice quote_lattice(double value);
    /// Samples a fine surface at the lattice nodes (nearest grid node).
    static VolLattice sample(const VolSurface& a, const Grid& grid, std::vector<double> taus, std::vector<double> ys);
};

double interpolate_vol(const VolLattice& lattice, double tau, double y);
VolSurface interpolate_vol(const VolLattice& lattice, const Grid& grid);

/// Transpose of the lattice-to-grid interpolation applied to a gradient on the grid.
std::vector<double> interpolate_vol_transpose(const VolLattice& lattice, const Grid& grid, const Surface& g);

}  // namespace jdlv
