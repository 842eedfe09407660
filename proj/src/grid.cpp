#include "jdlv/grid.hpp"

#include "jdlv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jdlv {

namespace {

int exact_ratio(double value, double step, const char* what) {
    const double q = value / step;
    const double n = std::round(q);
    if (std::abs(q - n) > 1e-9 * std::max(1.0, std::abs(q))) {
        std::ostringstream msg;
        msg << what << " = " << value << " is not a multiple of step " << step;
        throw ConfigError(msg.str());
    }
    return static_cast<int>(n);
}

}  // namespace

double payoff(double y) { return std::max(0.0, -std::expm1(y)); }

Grid::Grid(double tau_max, double dtau, double y_min, double y_max, double dy) : dtau_(dtau), dy_(dy) {
    if (!(dtau > 0.0) || !(dy > 0.0)) throw ConfigError("grid steps must be positive");
    if (!(tau_max > 0.0)) throw ConfigError("tau_max must be positive");
    if (!(y_min < 0.0 && y_max > 0.0)) throw ConfigError("grid must satisfy y_min < 0 < y_max");
    steps_ = exact_ratio(tau_max, dtau, "tau_max");
    j_lo_ = exact_ratio(y_min, dy, "y_min");
    j_hi_ = exact_ratio(y_max, dy, "y_max");
    if (steps_ < 1 || j_lo_ > -1 || j_hi_ < 1) throw ConfigError("grid needs I >= 1 and at least one node on each side of 0");
}

Grid Grid::symmetric(double tau_max, int I, double y_max, int J) {
    if (I < 1 || J < 1) throw ConfigError("grid needs I >= 1 and J >= 1");
    return Grid(tau_max, tau_max / I, -y_max, y_max, y_max / J);
}

int Grid::j_of(double y) const {
    const double q = y / dy_;
    const int j = static_cast<int>(std::floor(q + 0.5));
    if (std::abs(q - j) > 1e-9) {
        std::ostringstream msg;
        msg << "y = " << y << " is not a lattice node (dy = " << dy_ << ")";
        throw ConfigError(msg.str());
    }
    if (!contains_j(j)) {
        std::ostringstream msg;
        msg << "y = " << y << " lies outside [" << y_min() << ", " << y_max() << "]";
        throw ConfigError(msg.str());
    }
    return j;
}

int Grid::i_of(double tau) const {
    const double q = tau / dtau_;
    const int i = static_cast<int>(std::floor(q + 0.5));
    if (std::abs(q - i) > 1e-9) {
        std::ostringstream msg;
        msg << "tau = " << tau << " is not a lattice level (dtau = " << dtau_ << ")";
        throw ConfigError(msg.str());
    }
    if (i < 0 || i > steps_) {
        std::ostringstream msg;
        msg << "tau = " << tau << " lies outside [0, " << tau_max() << "]";
        throw ConfigError(msg.str());
    }
    return i;
}

std::vector<double> Grid::y_nodes() const {
    std::vector<double> ys(nodes());
    for (int c = 0; c < nodes(); ++c) ys[c] = y_at_col(c);
    return ys;
}

std::vector<double> Grid::payoff_row() const {
    std::vector<double> row(nodes());
    for (int c = 0; c < nodes(); ++c) row[c] = payoff(y_at_col(c));
    return row;
}

MarketParams::MarketParams(double rate, double spot) : r(rate), S0(spot) {
    if (!(spot > 0.0)) throw DomainError("spot price must be positive");
}

double extend_index(std::span<const double> u_row, const Grid& grid, int j) {
    if (grid.contains_j(j)) return u_row[grid.col(j)];
    return payoff(grid.y(j));
}

double log_moneyness(double strike, double spot) {
    if (!(strike > 0.0) || !(spot > 0.0)) throw DomainError("strike and spot must be positive");
    return std::log(strike / spot);
}

double strike_from_log_moneyness(double y, double spot) {
    if (!(spot > 0.0)) throw DomainError("spot must be positive");
    return spot * std::exp(y);
}

VolSurface VolSurface::constant(const Grid& grid, double value) {
    return VolSurface{Surface(grid.levels(), grid.nodes(), value)};
}

}  // namespace jdlv
