#pragma once

#include <functional>
#include <span>
#include <vector>

namespace jdlv {

/// Objective value with its gradient at one point.
struct ValueGrad {
    double value = 0.0;
    std::vector<double> grad;
};

struct DescentOptions {
    int max_iters = 1000;
    double grad_tol = 1e-8;     ///< on the projected-gradient norm
    double armijo_c = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 50;
    double initial_step = 0.0;  ///< first trial step; <= 0 picks 1/||g||
    bool barzilai_borwein = true;
};

enum class DescentExit { converged, stopped_by_rule, max_iters, stalled };

struct DescentResult {
    std::vector<double> x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    int evaluations = 0;
    DescentExit exit = DescentExit::max_iters;
    std::vector<double> values;  ///< objective after each accepted step, starting with x0
};

/// Called after every accepted iterate; returning true ends the run with stopped_by_rule.
using StopRule = std::function<bool(int iter, std::span<const double> x, double value)>;

/**
 * Projected gradient descent. Steps are Barzilai-Borwein (BB1, safeguarded)
 * with Armijo backtracking on the projected arc. The stop rule is consulted
 * once before the first step as well.
 */
DescentResult projected_descent(std::vector<double> x0,
                                const std::function<ValueGrad(std::span<const double>)>& evaluate,
                                const std::function<void(std::span<double>)>& project,
                                const DescentOptions& opts, const StopRule& stop = {});

}  // namespace jdlv
