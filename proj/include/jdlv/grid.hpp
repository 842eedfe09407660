/**
 * @file grid.hpp
 * @brief Truncated (tau, y) lattice, market constants, and the payoff rule
 *
 * Log-moneyness nodes sit at exact multiples y_j = j*dy for j = j_lo..j_hi,
 * maturities at tau_i = i*dtau for i = 0..I. Columns of every surface are
 * addressed by col = j - j_lo.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace jdlv {

/// max(0, 1 - e^y): normalized call payoff and the value used outside the lattice.
double payoff(double y);

class Grid {
public:
    /// Uniform lattice. tau_max/dtau and y_min/dy, y_max/dy must be integers to 1e-9.
    Grid(double tau_max, double dtau, double y_min, double y_max, double dy);

    /// Symmetric lattice with I time steps and nodes j = -J..J.
    static Grid symmetric(double tau_max, int I, double y_max, int J);

    double tau_max() const { return dtau_ * steps_; }
    double y_min() const { return dy_ * j_lo_; }
    double y_max() const { return dy_ * j_hi_; }
    double dtau() const { return dtau_; }
    double dy() const { return dy_; }
    int steps() const { return steps_; }
    int j_lo() const { return j_lo_; }
    int j_hi() const { return j_hi_; }
    int nodes() const { return j_hi_ - j_lo_ + 1; }
    int levels() const { return steps_ + 1; }
    double beta() const { return dtau_ / dy_; }
    double eta() const { return dtau_ / (dy_ * dy_); }

    double tau(int i) const { return i * dtau_; }
    double y(int j) const { return j * dy_; }
    double y_at_col(int col) const { return (col + j_lo_) * dy_; }
    int col(int j) const { return j - j_lo_; }
    /// Column of the j = 0 node (the at-the-money column).
    int zero_col() const { return -j_lo_; }

    /// Nearest node index, rejecting offsets beyond 1e-9*dy. Throws ConfigError.
    int j_of(double y) const;
    int i_of(double tau) const;
    bool contains_j(int j) const { return j >= j_lo_ && j <= j_hi_; }

    std::vector<double> y_nodes() const;
    std::vector<double> payoff_row() const;

    bool operator==(const Grid& other) const = default;

private:
    double dtau_;
    double dy_;
    int steps_;
    int j_lo_;
    int j_hi_;
};

struct MarketParams {
    double r = 0.0;
    double S0 = 1.0;

    MarketParams() = default;
    MarketParams(double rate, double spot);
};

/// Row value at signed node index j, or payoff(j*dy) once j leaves the lattice.
double extend_index(std::span<const double> u_row, const Grid& grid, int j);

/// y = ln(K/S0). Throws DomainError for nonpositive inputs.
double log_moneyness(double strike, double spot);
double strike_from_log_moneyness(double y, double spot);

/// Dense row-major (levels x nodes) matrix shared by all surface types.
class Surface {
public:
    Surface() = default;
    Surface(int rows, int cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, value) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int c) { return data_[static_cast<std::size_t>(i) * cols_ + c]; }
    double operator()(int i, int c) const { return data_[static_cast<std::size_t>(i) * cols_ + c]; }
    std::span<double> row(int i) { return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> row(int i) const { return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)}; }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Local variance a = sigma^2/2 on every grid node.
struct VolSurface {
    Surface a;

    static VolSurface constant(const Grid& grid, double value);
};

/// Normalized call prices u = C/S0.
struct PriceSurface {
    Surface u;
};

}  // namespace jdlv
