/**
 * @file workflows.hpp
 * @brief Run configuration with named presets, and the end-to-end experiments
 *        the command-line tool and the acceptance suite share
 */
#pragma once

#include "jdlv/adjoint.hpp"
#include "jdlv/analytic.hpp"
#include "jdlv/mc.hpp"
#include "jdlv/regularization.hpp"
#include "jdlv/splitting.hpp"
#include "jdlv/synthetic.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jdlv {

enum class VolModel { reference, constant };
enum class JumpModel { gaussian, prior, none };
enum class NodeSet { vol, joint };

struct RunConfig {
    std::string preset = "custom";
    Grid grid{1.0, 0.005, -5.0, 5.0, 0.025};
    MarketParams mkt;
    SchemeOptions scheme;

    VolModel vol_model = VolModel::reference;
    double vol_constant = 0.0113;  ///< a when vol_model is constant
    JumpModel jump_model = JumpModel::gaussian;
    NodeSet nodes = NodeSet::vol;
    double noise = 0.0;
    std::uint64_t seed = 20240601;

    double alpha1 = 1e-4;
    double alpha2 = 0.0;
    SobolevWeights sobolev;
    bool sobolev_divide_by_spacing = false;
    PenaltyKind tail_penalty = PenaltyKind::l2_tail;
    double a0 = 0.08;
    double a_lower = 0.005;
    double a_upper = 0.125;
    double residual_tol = 0.01;
    std::optional<double> delta;
    double lambda = 3.0;
    int vol_iters = 600;
    int tail_iters = 300;
    int outer_max = 4;
    double grad_tol = 1e-12;
    TailMode tail_mode = TailMode::log_fourier;
    int tail_terms = 3;
    double nu_alpha = 1e-5;

    int paths = 10000;
    int steps = 100;
    std::vector<double> maturities{0.1, 0.2, 0.3, 0.4};
    PutPayoff put_payoff = PutPayoff::vs_terminal;

    /// table1, sec71, sec72, sec73, or custom. Throws ConfigError otherwise.
    static RunConfig named(std::string_view preset);
    /// Starts from the preset named in the document (custom when absent) and
    /// overlays the remaining keys. Unknown keys throw ConfigError.
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    /// Throws ConfigError on out-of-range settings.
    void validate() const;
};

VolSurface true_vol(const RunConfig& cfg);
JumpDensity true_jumps(const RunConfig& cfg);
std::vector<QuoteNode> config_nodes(const RunConfig& cfg);
/// Clean or noisy quotes from the configured truth on the configured node set.
QuoteSet synthesize(const RunConfig& cfg);

TikhonovObjective make_objective(const RunConfig& cfg, const QuoteSet& quotes, const TailFunction& tail_prior);
DescendOptions vol_options(const RunConfig& cfg);
DescendOptions tail_options(const RunConfig& cfg);

struct VolRun {
    VolLattice a;
    DescendResult result;
};

/// Vol-only calibration with the tail frozen at phi.
VolRun calibrate_vol(const RunConfig& cfg, const QuoteSet& quotes, const TailFunction& phi);

struct SplitRun {
    SplitState state;
    TailFunction phi;
    bool clamped = false;
};

/// Joint calibration started from a0 and the log-tail fit of the prior tail.
SplitRun calibrate_split(const RunConfig& cfg, const QuoteSet& quotes,
                         const std::function<void(const HistoryEntry&)>& progress = {});

/// ||sqrt(2a) - sqrt(2b)|| / ||sqrt(2b)|| over lattice nodes.
double sigma_distance(const VolLattice& est, const VolLattice& truth);
/// Normalized distance over every column except y = 0.
double tail_distance(const TailFunction& est, const TailFunction& truth, const Grid& grid);
/// Normalized distance over columns whose y is not in `excluded` (matched to the nearest node).
double nu_distance(const JumpDensity& est, const JumpDensity& truth, const Grid& grid,
                   const std::vector<double>& excluded);

/// Implied vols at the quote-lattice nodes; NaN where inversion fails.
std::vector<double> lattice_implied_vols(const PriceSurface& u, const Grid& grid, const MarketParams& mkt,
                                         const std::vector<double>& taus, const std::vector<double>& ys);

struct FourierComparison {
    ComparisonStats stats;
    std::vector<double> pide_iv;
    std::vector<double> fourier_iv;
};

/// Constant-vol jump model against the Fourier oracle over tau = 0.1..1, |y| <= 0.5.
FourierComparison compare_with_fourier(const RunConfig& cfg);

struct GradientCheck {
    std::vector<double> vol_errors;   ///< relative error per direction
    std::vector<double> tail_errors;
    double max_error = 0.0;
    bool passed = false;
};

/**
 * Central finite differences of 0.5 sum r^2 against the discrete adjoint on a
 * symmetric (steps x nodes) grid over tau in [0, 0.5], y in [-1, 1] with smooth
 * random coefficients and quotes.
 */
GradientCheck check_gradients(int steps, int nodes, int directions, std::uint64_t seed, const SchemeOptions& scheme,
                              double tol = 1e-4);

}  // namespace jdlv
