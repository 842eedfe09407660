// Independent oracles shared by the unit tests.
#pragma once

#include "jdlv/grid.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

/// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

inline double gaussian_nu(double x) { return 0.1 / std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * x * x); }

/// Continuous double-exponential tail of a density on [lo, hi].
inline double tail(const std::function<double(double)>& nu, double y, double lo, double hi, int n = 100000) {
    if (y > 0) return simpson([&](double x) { return (std::exp(x) - std::exp(y)) * nu(x); }, y, hi, n);
    return simpson([&](double x) { return (std::exp(y) - std::exp(x)) * nu(x); }, lo, y, n);
}

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double rel_dist(std::span<const double> a, std::span<const double> b) {
    double n = 0.0;
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        n += (a[k] - b[k]) * (a[k] - b[k]);
        d += b[k] * b[k];
    }
    return std::sqrt(n / d);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
