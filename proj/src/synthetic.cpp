#include "jdlv/synthetic.hpp"

#include "jdlv/analytic.hpp"
#include "jdlv/errors.hpp"
#include "jdlv/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace jdlv {

std::string_view to_string(Provenance p) { return p == Provenance::synthetic ? "synthetic" : "market"; }

Provenance provenance_from_string(std::string_view name) {
    if (name == "synthetic") return Provenance::synthetic;
    if (name == "market") return Provenance::market;
    throw ConfigError("unknown provenance '" + std::string(name) + "'");
}

std::vector<double> QuoteSet::prices() const {
    std::vector<double> p;
    p.reserve(quotes.size());
    for (const Quote& q : quotes) p.push_back(q.price);
    return p;
}

void QuoteSet::validate(const Grid& grid, const MarketParams& mkt) const {
    std::ostringstream bad;
    int count = 0;
    std::set<std::pair<int, int>> seen;
    for (const Quote& q : quotes) {
        std::string why;
        try {
            const int i = grid.i_of(q.tau);
            const int j = grid.j_of(q.y);
            if (!grid.contains_j(j) || i < 0 || i > grid.steps()) why = "outside the grid";
            else if (!seen.emplace(i, j).second) why = "duplicate node";
        } catch (const ConfigError&) {
            why = "not on a grid node";
        }
        const double lower = std::max(0.0, 1.0 - std::exp(q.y - mkt.r * q.tau)) - 1e-9;
        if (why.empty() && !(q.price > lower && q.price < 1.0)) why = "price outside the arbitrage band";
        if (why.empty() && !(q.weight >= 0.0)) why = "negative weight";
        if (!why.empty()) {
            if (count < 10) bad << "\n  (tau=" << q.tau << ", y=" << q.y << ", price=" << q.price << "): " << why;
            ++count;
        }
    }
    if (count > 0) {
        std::ostringstream msg;
        msg << count << " invalid quote(s):" << bad.str();
        throw ConfigError(msg.str());
    }
}

std::vector<QuoteNode> quote_nodes(const QuoteSet& quotes, const Grid& grid) {
    std::vector<QuoteNode> nodes;
    nodes.reserve(quotes.size());
    for (const Quote& q : quotes.quotes) nodes.push_back({grid.i_of(q.tau), grid.j_of(q.y)});
    return nodes;
}

std::vector<QuoteNode> sparse_nodes(const Grid& grid, int j_lo, int j_hi) {
    std::vector<QuoteNode> nodes;
    std::ostringstream off;
    for (int i = 1; i <= 10; ++i) {
        for (int j = j_lo; j <= j_hi; ++j) {
            const double tau = 0.1 * i;
            const double y = 0.05 * j;
            try {
                const QuoteNode n{grid.i_of(tau), grid.j_of(y)};
                if (n.i > grid.steps() || !grid.contains_j(n.j)) throw ConfigError("outside");
                nodes.push_back(n);
            } catch (const ConfigError&) {
                off << " (" << tau << ", " << y << ")";
            }
        }
    }
    if (!off.str().empty()) throw ConfigError("quote nodes not on the grid:" + off.str());
    return nodes;
}

std::vector<QuoteNode> vol_calibration_nodes(const Grid& grid) { return sparse_nodes(grid, -10, 10); }

std::vector<QuoteNode> joint_calibration_nodes(const Grid& grid) { return sparse_nodes(grid, -90, 10); }

double reference_sigma(double tau, double y) {
    if (std::abs(y) <= 0.4) return 0.4 - 0.16 * std::exp(-0.5 * tau) * std::cos(4.0 * std::numbers::pi * y / 5.0);
    return 0.4;
}

VolSurface reference_vol_surface(const Grid& grid) {
    VolSurface a{Surface(grid.levels(), grid.nodes())};
    for (int i = 0; i < grid.levels(); ++i) {
        for (int c = 0; c < grid.nodes(); ++c) {
            const double s = reference_sigma(grid.tau(i), grid.y_at_col(c));
            a.a(i, c) = 0.5 * s * s;
        }
    }
    return a;
}

double reference_jump_pdf(double x) { return 0.1 / std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * x * x); }

JumpDensity reference_jump_density(const Grid& grid) { return cell_masses(reference_jump_pdf, grid); }

double joint_prior_pdf(double x) {
    if (x >= 0.0 && x <= 5.0) return 0.5 * std::exp(-0.5 * x * x - 0.5 * x);
    if (x < 0.0 && x >= -5.0) return 0.5 * std::exp(-0.5 * x * x - 0.5 * std::abs(x));
    return 0.0;
}

JumpDensity joint_prior_density(const Grid& grid) { return cell_masses(joint_prior_pdf, grid); }

QuoteSet make_quotes(const VolSurface& a, const TailFunction& phi, const Grid& grid, const MarketParams& mkt,
                     const std::vector<QuoteNode>& nodes, const NoiseSpec& noise, const SchemeOptions& opts) {
    if (noise.delta < 0.0) throw DomainError("noise level must be nonnegative");
    std::ostringstream off;
    for (const QuoteNode& n : nodes) {
        if (n.i < 0 || n.i > grid.steps() || !grid.contains_j(n.j)) off << " (i=" << n.i << ", j=" << n.j << ")";
    }
    if (!off.str().empty()) throw ConfigError("quote nodes not on the grid:" + off.str());

    const PriceSurface u = solve_forward(a, phi, grid, mkt, opts);
    QuoteSet out;
    out.seed = noise.seed;
    for (const QuoteNode& n : nodes) {
        Quote q;
        q.tau = grid.tau(n.i);
        q.y = grid.y(n.j);
        q.price = u.u(n.i, grid.col(n.j));
        out.quotes.push_back(q);
    }
    if (noise.delta > 0.0) {
        CounterRng rng(noise.seed, 0);
        std::vector<double> e(nodes.size());
        double ne = 0.0;
        double nc = 0.0;
        for (std::size_t k = 0; k < e.size(); ++k) {
            e[k] = rng.normal();
            ne += e[k] * e[k];
            nc += out.quotes[k].price * out.quotes[k].price;
        }
        const double scale = noise.delta * std::sqrt(nc / ne);
        for (std::size_t k = 0; k < e.size(); ++k) {
            Quote& q = out.quotes[k];
            const double lower = std::max(0.0, 1.0 - std::exp(q.y - mkt.r * q.tau));
            q.price = std::clamp(q.price + scale * e[k], lower + 1e-12, 1.0 - 1e-12);
        }
        out.noise = noise.delta;
    }
    for (Quote& q : out.quotes) {
        if (q.tau <= 0.0) continue;
        try {
            q.implied_vol = implied_vol(q.price, q.y, q.tau, mkt.r);
        } catch (const OutOfRange&) {
        }
    }
    return out;
}

namespace {

std::vector<double> steps_of(double first, double step, int count) {
    std::vector<double> v(count);
    for (int k = 0; k < count; ++k) v[k] = first + step * k;
    return v;
}

/// Bracketing index and upper weight along one axis, clamped to the end nodes.
std::pair<std::size_t, double> bracket(const std::vector<double>& xs, double x) {
    if (xs.size() == 1 || x <= xs.front()) return {0, 0.0};
    if (x >= xs.back()) return {xs.size() - 2, 1.0};
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
    return {k, (x - xs[k]) / (xs[k + 1] - xs[k])};
}

/// The four (index, weight) pairs of the bilinear stencil at (tau, y).
std::array<std::pair<std::size_t, double>, 4> stencil(const VolLattice& l, double tau, double y) {
    const auto [r, wt] = bracket(l.taus, tau);
    const auto [c, wy] = bracket(l.ys, y);
    const std::size_t nc = l.cols();
    const std::size_t r1 = l.rows() > 1 ? r + 1 : r;
    const std::size_t c1 = nc > 1 ? c + 1 : c;
    return {{{r * nc + c, (1 - wt) * (1 - wy)},
             {r * nc + c1, (1 - wt) * wy},
             {r1 * nc + c, wt * (1 - wy)},
             {r1 * nc + c1, wt * wy}}};
}

}  // namespace

VolLattice VolLattice::quote_lattice(double value) {
    VolLattice l;
    l.taus = steps_of(0.1, 0.1, 10);
    l.ys = steps_of(-0.5, 0.05, 21);
    for (double& y : l.ys) y = std::round(y * 1e12) / 1e12;
    for (double& t : l.taus) t = std::round(t * 1e12) / 1e12;
    l.values.assign(l.taus.size() * l.ys.size(), value);
    return l;
}

VolLattice VolLattice::sample(const VolSurface& a, const Grid& grid, std::vector<double> taus, std::vector<double> ys) {
    VolLattice l{std::move(taus), std::move(ys), {}};
    l.values.resize(l.rows() * l.cols());
    for (std::size_t r = 0; r < l.rows(); ++r) {
        for (std::size_t c = 0; c < l.cols(); ++c) l.at(r, c) = a.a(grid.i_of(l.taus[r]), grid.col(grid.j_of(l.ys[c])));
    }
    return l;
}

double interpolate_vol(const VolLattice& lattice, double tau, double y) {
    if (lattice.values.size() != lattice.rows() * lattice.cols() || lattice.values.empty())
        throw ConfigError("vol lattice is empty or mis-sized");
    double v = 0.0;
    for (const auto& [k, w] : stencil(lattice, tau, y)) v += w * lattice.values[k];
    return v;
}

VolSurface interpolate_vol(const VolLattice& lattice, const Grid& grid) {
    VolSurface a{Surface(grid.levels(), grid.nodes())};
    for (int i = 0; i < grid.levels(); ++i) {
        for (int c = 0; c < grid.nodes(); ++c) a.a(i, c) = interpolate_vol(lattice, grid.tau(i), grid.y_at_col(c));
    }
    return a;
}

std::vector<double> interpolate_vol_transpose(const VolLattice& lattice, const Grid& grid, const Surface& g) {
    std::vector<double> out(lattice.values.size(), 0.0);
    for (int i = 0; i < grid.levels(); ++i) {
        for (int c = 0; c < grid.nodes(); ++c) {
            const double gv = g(i, c);
            if (gv == 0.0) continue;
            for (const auto& [k, w] : stencil(lattice, grid.tau(i), grid.y_at_col(c))) out[k] += w * gv;
        }
    }
    return out;
}

}  // namespace jdlv
