#include "jdlv/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jdlv {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double projected_grad_norm(std::span<const double> x, std::span<const double> g,
                           const std::function<void(std::span<double>)>& project) {
    std::vector<double> trial(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) trial[k] = x[k] - g[k];
    project(trial);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (trial[k] - x[k]) * (trial[k] - x[k]);
    return std::sqrt(s);
}

}  // namespace

DescentResult projected_descent(std::vector<double> x0,
                                const std::function<ValueGrad(std::span<const double>)>& evaluate,
                                const std::function<void(std::span<double>)>& project,
                                const DescentOptions& opts, const StopRule& stop) {
    DescentResult res;
    res.x = std::move(x0);
    project(res.x);
    ValueGrad cur = evaluate(res.x);
    res.evaluations = 1;
    res.value = cur.value;
    res.values.push_back(cur.value);
    res.grad_norm = projected_grad_norm(res.x, cur.grad, project);

    if (stop && stop(0, res.x, cur.value)) {
        res.exit = DescentExit::stopped_by_rule;
        return res;
    }

    const double gnorm = std::sqrt(dot(cur.grad, cur.grad));
    double step = opts.initial_step > 0.0 ? opts.initial_step : (gnorm > 0.0 ? 1.0 / gnorm : 1.0);
    std::vector<double> trial(res.x.size());

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        if (res.grad_norm <= opts.grad_tol) {
            res.exit = DescentExit::converged;
            return res;
        }
        double t = step;
        bool accepted = false;
        ValueGrad next;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            for (std::size_t k = 0; k < trial.size(); ++k) trial[k] = res.x[k] - t * cur.grad[k];
            project(trial);
            double decrease = 0.0;
            for (std::size_t k = 0; k < trial.size(); ++k) decrease += cur.grad[k] * (trial[k] - res.x[k]);
            if (decrease == 0.0) {
                // Projected step is null: x is stationary up to rounding.
                res.exit = DescentExit::converged;
                return res;
            }
            next = evaluate(trial);
            ++res.evaluations;
            if (std::isfinite(next.value) && next.value <= cur.value + opts.armijo_c * decrease) {
                accepted = true;
                break;
            }
            t *= opts.shrink;
        }
        if (!accepted) {
            res.exit = DescentExit::stalled;
            return res;
        }

        double ss = 0.0;
        double sy = 0.0;
        for (std::size_t k = 0; k < trial.size(); ++k) {
            const double s = trial[k] - res.x[k];
            const double y = next.grad[k] - cur.grad[k];
            ss += s * s;
            sy += s * y;
        }
        if (opts.barzilai_borwein && sy > 0.0) {
            step = std::clamp(ss / sy, 1e-30, 1e30);
        } else {
            step = std::min(t * 2.0, 1e30);
        }

        res.x.swap(trial);
        cur = std::move(next);
        res.value = cur.value;
        res.values.push_back(cur.value);
        res.iterations = iter;
        res.grad_norm = projected_grad_norm(res.x, cur.grad, project);
        if (stop && stop(iter, res.x, cur.value)) {
            res.exit = DescentExit::stopped_by_rule;
            return res;
        }
    }
    res.exit = res.grad_norm <= opts.grad_tol ? DescentExit::converged : DescentExit::max_iters;
    return res;
}

}  // namespace jdlv
