#include "jdlv/analytic.hpp"

#include "jdlv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace jdlv {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double bs_price(double y, double tau, double sigma, double r) {
    if (tau <= 0.0) return payoff(y);
    if (!(sigma > 0.0)) throw DomainError("bs_price needs sigma > 0");
    const double sd = sigma * std::sqrt(tau);
    const double d1 = (-y + (r + 0.5 * sigma * sigma) * tau) / sd;
    const double d2 = d1 - sd;
    return norm_cdf(d1) - std::exp(y - r * tau) * norm_cdf(d2);
}

double bs_vega(double y, double tau, double sigma, double r) {
    if (tau <= 0.0) return 0.0;
    const double sd = sigma * std::sqrt(tau);
    const double d1 = (-y + (r + 0.5 * sigma * sigma) * tau) / sd;
    return std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * std::numbers::pi) * std::sqrt(tau);
}

double implied_vol(double price, double y, double tau, double r) {
    if (!(tau > 0.0)) throw DomainError("implied_vol needs tau > 0");
    const double lower = std::max(0.0, -std::expm1(y - r * tau));
    if (!(price > lower)) {
        std::ostringstream msg;
        msg << "price " << price << " is not above the lower bound " << lower << " at (tau=" << tau << ", y=" << y << ")";
        throw OutOfRange(msg.str(), lower);
    }
    if (!(price < 1.0)) {
        std::ostringstream msg;
        msg << "price " << price << " is not below the upper bound 1 at (tau=" << tau << ", y=" << y << ")";
        throw OutOfRange(msg.str(), 1.0);
    }
    double lo = 1e-6;
    double hi = 5.0;
    const double p_hi = bs_price(y, tau, hi, r);
    if (price > p_hi) {
        std::ostringstream msg;
        msg << "price " << price << " exceeds the sigma = 5 bracket value " << p_hi;
        throw OutOfRange(msg.str(), p_hi);
    }
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (bs_price(y, tau, mid, r) < price) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double sigma = 0.5 * (lo + hi);
    for (int k = 0; k < 3; ++k) {
        const double vega = bs_vega(y, tau, sigma, r);
        if (!(vega > 1e-300)) break;
        const double next = sigma - (bs_price(y, tau, sigma, r) - price) / vega;
        // Keep the polish inside the final bracket.
        if (next > 0.0 && std::abs(next - sigma) < 1e-3) sigma = next;
    }
    return sigma;
}

ComparisonStats compare(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ConfigError("compare: size mismatch");
    ComparisonStats s;
    s.count = a.size();
    if (a.empty()) return s;
    double num = 0.0;
    double den = 0.0;
    std::vector<double> rel(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += (a[k] - b[k]) * (a[k] - b[k]);
        den += b[k] * b[k];
        rel[k] = std::abs(a[k] - b[k]) / std::abs(b[k]);
    }
    s.normalized_distance = std::sqrt(num / den);
    double mean = 0.0;
    for (double v : rel) mean += v;
    mean /= static_cast<double>(rel.size());
    double var = 0.0;
    for (double v : rel) var += (v - mean) * (v - mean);
    s.mean_abs_rel = mean;
    s.std_abs_rel = std::sqrt(var / static_cast<double>(rel.size()));
    return s;
}

namespace {

using cplx = std::complex<double>;

struct JumpAtoms {
    std::vector<double> y;
    std::vector<double> mass;
};

JumpAtoms atoms_of(const JumpDensity& nu, const Grid& grid) {
    if (nu.nu.size() != static_cast<std::size_t>(grid.nodes())) throw ConfigError("jump density size does not match grid");
    JumpAtoms at;
    for (int c = 0; c < grid.nodes(); ++c) {
        if (nu.nu[c] == 0.0) continue;
        if (nu.nu[c] < 0.0) throw DomainError("jump density must be nonnegative");
        at.y.push_back(grid.y_at_col(c));
        at.mass.push_back(nu.nu[c]);
    }
    return at;
}

std::vector<double> integrate(double sigma, double r, double tau, std::span<const double> ys, const JumpAtoms& at,
                              double compensator, double alpha, double h, double xi_max) {
    const cplx i(0.0, 1.0);
    const int count = static_cast<int>(std::ceil(xi_max / h));
    const std::size_t na = at.y.size();
    // e^{i u y_j} with u = xi - (alpha + 1) i, advanced in xi by a rotation per atom.
    std::vector<cplx> phase(na);
    std::vector<cplx> rotate(na);
    std::vector<double> scale(na);
    for (std::size_t k = 0; k < na; ++k) {
        scale[k] = at.mass[k] * std::exp((alpha + 1.0) * at.y[k]);
        rotate[k] = std::exp(i * h * at.y[k]);
    }
    const double drift = r - 0.5 * sigma * sigma - compensator;
    double total_mass = 0.0;
    for (double m : at.mass) total_mass += m;

    std::vector<double> acc(ys.size(), 0.0);
    for (int m = 0; m <= count; ++m) {
        const double xi = m * h;
        if (m % 512 == 0) {
            for (std::size_t k = 0; k < na; ++k) phase[k] = std::exp(i * xi * at.y[k]);
        }
        cplx jumps = 0.0;
        for (std::size_t k = 0; k < na; ++k) {
            jumps += scale[k] * phase[k];
            phase[k] *= rotate[k];
        }
        const cplx u = xi - (alpha + 1.0) * i;
        const cplx exponent = tau * (i * u * drift - 0.5 * sigma * sigma * u * u + jumps - total_mass) - r * tau;
        const cplx denom = alpha * alpha + alpha - xi * xi + i * (2.0 * alpha + 1.0) * xi;
        const cplx psi = std::exp(exponent) / denom;
        const double weight = (m == 0 ? 0.5 : 1.0) * h;
        for (std::size_t k = 0; k < ys.size(); ++k) {
            acc[k] += weight * std::real(std::exp(-i * xi * ys[k]) * psi);
        }
    }
    for (std::size_t k = 0; k < ys.size(); ++k) acc[k] *= std::exp(-alpha * ys[k]) / std::numbers::pi;
    return acc;
}

double max_change(const std::vector<double>& a, const std::vector<double>& b) {
    double c = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) c = std::max(c, std::abs(a[k] - b[k]));
    return c;
}

bool admissible(std::span<const double> prices, std::span<const double> ys, double tau, double r) {
    for (std::size_t k = 0; k < prices.size(); ++k) {
        if (!std::isfinite(prices[k])) return false;
        const double lower = std::max(0.0, -std::expm1(ys[k] - r * tau));
        if (prices[k] < lower - 1e-8 || prices[k] > 1.0 + 1e-8) return false;
    }
    return true;
}

}  // namespace

FourierResult carr_madan_price(double sigma, const JumpDensity& nu, const Grid& grid, double tau,
                               std::span<const double> ys, double r, const FourierOptions& opts) {
    if (!(tau > 0.0)) throw DomainError("carr_madan_price needs tau > 0");
    if (!(sigma > 0.0)) throw DomainError("carr_madan_price needs sigma > 0");
    const JumpAtoms at = atoms_of(nu, grid);
    double compensator = 0.0;
    for (std::size_t k = 0; k < at.y.size(); ++k) compensator += at.mass[k] * std::expm1(at.y[k]);

    std::vector<double> dampings{opts.damping};
    dampings.insert(dampings.end(), opts.fallback_damping.begin(), opts.fallback_damping.end());

    FourierResult best;
    for (double alpha : dampings) {
        auto run = [&](double step, double range) {
            return integrate(sigma, r, tau, ys, at, compensator, alpha, step, range);
        };
        // Range first (diffusive factor at e^{-36}), then step, then one joint check.
        double xi_max = std::sqrt(72.0 / (sigma * sigma * tau));
        double h = 0.25;
        std::vector<double> cur = run(h, xi_max);
        for (int ref = 0; ref < opts.max_refinements; ++ref) {
            std::vector<double> next = run(h, 2.0 * xi_max);
            const double c = max_change(cur, next);
            xi_max *= 2.0;
            cur = std::move(next);
            if (c < 0.1 * opts.refinement_tol) break;
        }
        for (int ref = 0; ref < opts.max_refinements; ++ref) {
            std::vector<double> next = run(0.5 * h, xi_max);
            const double c = max_change(cur, next);
            h *= 0.5;
            cur = std::move(next);
            if (c < 0.1 * opts.refinement_tol) break;
        }
        const std::vector<double> check = run(0.5 * h, 2.0 * xi_max);
        FourierResult res{cur, alpha, max_change(cur, check), xi_max, h};
        if (admissible(res.prices, ys, tau, r) && res.last_change < 1e-8) return res;
        if (best.prices.empty()) best = std::move(res);
    }
    return best;
}

FourierResult carr_madan_price(const VolSurface& a, const JumpDensity& nu, const Grid& grid, double tau,
                               std::span<const double> ys, double r, const FourierOptions& opts) {
    const auto& vals = a.a.values();
    if (vals.empty()) throw ConfigError("empty vol surface");
    for (double v : vals) {
        if (v != vals.front()) throw ConfigError("carr_madan_price supports constant local volatility only");
    }
    return carr_madan_price(std::sqrt(2.0 * vals.front()), nu, grid, tau, ys, r, opts);
}

}  // namespace jdlv
