// Stencil pieces shared by the forward, tangent, and adjoint marches.
#pragma once

#include "jdlv/grid.hpp"

#include <span>
#include <vector>

namespace jdlv::detail {

/// Tridiagonal coefficients of the implicit half step for interior columns 1..n-2.
struct Tridiagonal {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> sup;
};

/// Row j of  I - dtau/2 * L  with L u = a (u_yy - u_y) - r u_y, interior columns only.
Tridiagonal implicit_matrix(std::span<const double> a_row, const Grid& grid, double r);

/// (I + dtau/2 * L) u on interior columns; boundary entries of out are left at 0.
void apply_explicit(std::span<const double> a_row, std::span<const double> u, const Grid& grid, double r,
                    std::span<double> out);

/// Transpose of apply_explicit restricted to interior rows and columns.
void apply_explicit_transpose(std::span<const double> a_row, std::span<const double> lam, const Grid& grid,
                              double r, std::span<double> out);

/// 1/2 eta d2u - 1/4 beta du: derivative of the explicit operator w.r.t. a at one node.
inline double vol_sensitivity(std::span<const double> u, int c, const Grid& grid) {
    return 0.5 * grid.eta() * (u[c + 1] - 2.0 * u[c] + u[c - 1]) - 0.25 * grid.beta() * (u[c + 1] - u[c - 1]);
}

/**
 * Explicit convolution of one row. With n = grid.nodes(), differences D are held
 * for the signed indices m = -(n-1)..(n-1):
 *   D_m = beta (U_{m+1} - 2 U_m + U_{m-1}) - dtau/2 (U_{m+1} - U_{m-1})
 * and M_j = sum_k w_k D_{j-k}.
 */
class Convolver {
public:
    explicit Convolver(const Grid& grid);

    /// D for a full row, extended by payoff (or by zero when linearized).
    void differences(std::span<const double> u_row, bool zero_extension);
    const std::vector<double>& D() const { return D_; }

    /// M_j for interior columns given weights w (length n); boundary entries set to 0.
    void apply(std::span<const double> w, std::span<double> out) const;

    /// Gradient of sum_j lam_j M_j with respect to the interior row values (zero extension).
    void apply_transpose(std::span<const double> w, std::span<const double> lam, std::span<double> out);

    /// Accumulates g_k += sum_j lam_j D_{j-k} over interior j.
    void accumulate_weight_gradient(std::span<const double> lam, std::span<double> g) const;

private:
    const Grid& grid_;
    int n_;
    double c_plus_;
    double c_zero_;
    double c_minus_;
    std::vector<double> U_;   // signed index m = -n..n at position m + n
    std::vector<double> D_;   // signed index m = -(n-1)..(n-1) at position m + n - 1
    std::vector<double> E_;   // scratch for the transpose
};

}  // namespace jdlv::detail
