/**
 * @file splitting.hpp
 * @brief Alternating (splitting) calibration of the volatility lattice and the tail
 *
 * The tail is either nodal or parametrized through Gamma = log(phi) expanded on
 * each half-line in the cosine basis cos(k pi (y - lo) / (hi - lo)), k = 0..K-1.
 */
#pragma once

#include "jdlv/regularization.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace jdlv {

enum class TailMode { nodal, log_fourier };

std::string_view to_string(TailMode mode);
TailMode tail_mode_from_string(std::string_view name);

struct TailParametrization {
    TailMode mode = TailMode::log_fourier;
    std::vector<double> nodal;    ///< nodal mode: phi on the lattice
    std::vector<double> c_minus;  ///< log_fourier mode: coefficients on (y_min, 0)
    std::vector<double> c_plus;   ///< log_fourier mode: coefficients on (0, y_max)

    /// Flat parameter vector (nodal values, or c_minus followed by c_plus).
    std::vector<double> params() const;
    void set_params(std::span<const double> p);
};

struct TailEvaluation {
    TailFunction phi;
    bool clamped = false;  ///< some Gamma exceeded 50 and was clamped
};

/// Throws ConfigError for nodal parametrizations of the wrong size.
TailEvaluation tail_coeffs_to_phi(const TailParametrization& p, const Grid& grid);

/// Least-squares fit of log(phi) on each half-line (nodes with phi <= 0 are ignored).
TailParametrization fit_log_fourier(const TailFunction& phi, const Grid& grid, int terms = 3);

/// Map used by the tail block: parameters -> phi with the exact chain rule.
TailMap tail_map(const TailParametrization& shape, const Grid& grid);

enum class Block { vol, tail };

std::string_view to_string(Block b);

struct HistoryEntry {
    int outer = 0;
    Block block = Block::vol;
    int inner_iterations = 0;
    DescentExit inner_exit = DescentExit::max_iters;
    double objective = 0.0;
    double misfit = 0.0;
    double normalized_residual = 0.0;
    double vol_penalty = 0.0;
    double tail_penalty = 0.0;
    double grad_norm = 0.0;
};

enum class SplitStop { residual, discrepancy, stationary, outer_max };

std::string_view to_string(SplitStop s);

struct SplitState {
    VolLattice a;
    TailParametrization tail;
    int outer_iter = 0;
    std::vector<HistoryEntry> history;
    SplitStop stop = SplitStop::outer_max;
    bool stalled = false;          ///< an inner line search stalled
    bool monotone = true;          ///< objective never increased across blocks
    double initial_objective = 0.0;
    double initial_residual = 0.0;
};

struct SplitConfig {
    DescendOptions vol;
    DescendOptions tail;
    int outer_max = 4;
    double residual_tol = 0.002;
    std::optional<double> delta;
    double lambda = 3.0;
    Block first = Block::vol;
    bool optimize_vol = true;
    bool optimize_tail = true;
    std::function<void(const HistoryEntry&)> progress;
};

SplitState split_calibrate(const TikhonovObjective& objective, SplitState init, const SplitConfig& cfg);

}  // namespace jdlv
