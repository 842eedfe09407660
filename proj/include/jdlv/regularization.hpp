/**
 * @file regularization.hpp
 * @brief Tikhonov objective for the joint calibration: quote misfit plus convex
 *        penalties on the volatility lattice and on the tail, block descent,
 *        and the discrepancy test
 *
 *   F(a, phi) = sum_q w_q (u_q(a, phi) - p_q)^2 + alpha1 f(a) + alpha2 g(phi)
 */
#pragma once

#include "jdlv/adjoint.hpp"
#include "jdlv/forward_pide.hpp"
#include "jdlv/grid.hpp"
#include "jdlv/levy_tail.hpp"
#include "jdlv/optim.hpp"
#include "jdlv/synthetic.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace jdlv {

struct MisfitResult {
    double value = 0.0;                ///< sum_q w_q r_q^2
    double normalized_residual = 0.0;  ///< ||F - p|| / ||p|| with the same weights
    std::vector<double> residuals;     ///< r_q = model - quote, in quote order
};

/// Throws DomainError on an empty quote set.
MisfitResult misfit(const PriceSurface& u, const QuoteSet& quotes, const Grid& grid);

enum class PenaltyKind { sobolev_vol, kl_tail, l2_tail };

std::string_view to_string(PenaltyKind kind);
PenaltyKind penalty_kind_from_string(std::string_view name);

/// Weights of ||x - x0||^2 + w_tau ||D_tau (x - x0)||^2 + w_y ||D_y (x - x0)||^2.
struct SobolevWeights {
    double w0 = 1.0;
    double wtau = 1.0;
    double wy = 100.0;
};

struct Penalty {
    PenaltyKind kind = PenaltyKind::l2_tail;
    std::vector<double> prior;
    SobolevWeights weights;
    /// Shape and spacing of the lattice the sobolev penalty differences over.
    std::size_t rows = 0;
    std::size_t cols = 0;
    double dtau = 1.0;
    double dy = 1.0;
    /// Entries excluded from tail penalties (e.g. the y = 0 column).
    std::vector<char> skip;

    /// Differences are plain x_{k+1} - x_k unless divide_by_spacing, which turns them
    /// into difference quotients on the lattice spacing.
    static Penalty sobolev(const VolLattice& prior, SobolevWeights w = {}, bool divide_by_spacing = false);
    static Penalty tail(PenaltyKind kind, const TailFunction& prior, const Grid& grid);
};

/**
 * Value and exact gradient. KL uses x log(x/x0) - x + x0 and needs x0 > 0 on
 * every entry that is not skipped; entries with x0 = 0 are skipped and must
 * have x = 0. Throws DomainError on nonpositive KL arguments.
 */
ValueGrad penalty_value_and_grad(std::span<const double> x, const Penalty& penalty);

struct TikhonovConfig {
    double alpha1 = 1e-4;
    double alpha2 = 0.0;
    Penalty vol_penalty;
    Penalty tail_penalty;
    MarketParams mkt;
    SchemeOptions scheme;
};

/// One objective evaluation with optional block gradients.
struct Evaluation {
    double value = 0.0;
    double misfit = 0.0;
    double normalized_residual = 0.0;
    double vol_penalty = 0.0;
    double tail_penalty = 0.0;
    std::vector<double> grad_vol;   ///< on the vol lattice
    std::vector<double> grad_phi;   ///< nodal, phi_0 entry zero
};

class TikhonovObjective {
public:
    TikhonovObjective(const Grid& grid, QuoteSet quotes, TikhonovConfig cfg);

    const Grid& grid() const { return grid_; }
    const QuoteSet& quotes() const { return quotes_; }
    const TikhonovConfig& config() const { return cfg_; }

    Evaluation evaluate(const VolLattice& vol, const TailFunction& phi, bool want_vol_grad,
                        bool want_tail_grad) const;

private:
    Grid grid_;
    QuoteSet quotes_;
    std::vector<QuoteNode> nodes_;
    TikhonovConfig cfg_;
};

/// Maps a tail parameter vector to nodal phi and pulls nodal gradients back.
struct TailMap {
    std::function<TailFunction(std::span<const double>)> to_phi;
    std::function<std::vector<double>(std::span<const double> p, std::span<const double> dphi)> pullback;
    std::function<void(std::span<double>)> project;
};

/// Identity map on nodal phi with projection onto phi >= 0, phi_0 = 0.
TailMap nodal_tail_map(const Grid& grid);

struct DescendOptions {
    DescentOptions inner{.max_iters = 500};
    double residual_tol = 0.0;       ///< stop once the normalized residual falls below; <= 0 disables
    std::optional<double> delta;     ///< noise level for the discrepancy test
    double lambda = 3.0;
    double a_lower = 0.005;
    double a_upper = 0.125;
};

struct DescendResult {
    std::vector<double> x;
    DescentResult inner;
    Evaluation final;
    std::vector<double> residuals;  ///< normalized residual after each accepted iterate, starting with x0
};

/// Gradient descent on the vol lattice with the tail frozen; values are boxed to [a_lower, a_upper].
DescendResult descend_vol(const VolLattice& x0, const TailFunction& phi, const TikhonovObjective& objective,
                          const DescendOptions& opts);

/// Gradient descent on the tail parameters with the vol lattice frozen.
DescendResult descend_tail(std::vector<double> p0, const TailMap& map, const VolLattice& vol,
                           const TikhonovObjective& objective, const DescendOptions& opts);

enum class Discrepancy { proceed, stop };

/// stop when residual_norm < lambda * delta. Throws DomainError for delta < 0.
Discrepancy discrepancy_check(double residual_norm, double delta, double lambda = 3.0);

}  // namespace jdlv
