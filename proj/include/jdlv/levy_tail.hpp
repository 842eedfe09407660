/**
 * @file levy_tail.hpp
 * @brief Jump measures on the lattice and their double-exponential tails
 *
 * The tail of a Levy measure nu is
 *   phi(y) = int_{-inf}^{y} (e^y - e^x) nu(dx)   for y < 0,
 *   phi(y) = int_{y}^{inf}  (e^x - e^y) nu(dx)   for y > 0,
 * which turns the jump integral of the pricing equation into a convolution
 * against u_yy - u_y. On the lattice nu is a vector of cell masses and phi
 * a vector of nodal values; both carry a zero at the y = 0 column.
 */
#pragma once

#include "jdlv/grid.hpp"

#include <functional>
#include <span>
#include <vector>

namespace jdlv {

/// Cell masses nu_j = nu([y_j - dy/2, y_j + dy/2]); the y = 0 cell is held at 0.
struct JumpDensity {
    std::vector<double> nu;

    static JumpDensity zeros(const Grid& grid) { return {std::vector<double>(grid.nodes(), 0.0)}; }
};

/// Nodal double-exponential tail; phi at the y = 0 column is 0 by convention.
struct TailFunction {
    std::vector<double> phi;

    static TailFunction zeros(const Grid& grid) { return {std::vector<double>(grid.nodes(), 0.0)}; }
};

/// Discrete tail: partial sums of (e^{y_j} - e^{y_l}) nu_l toward the far end of each half-line.
TailFunction tail_from_density(const JumpDensity& nu, const Grid& grid);

/// Transpose of the linear map nu -> phi applied to a nodal vector g.
std::vector<double> tail_transpose(std::span<const double> g, const Grid& grid);

/// Cell masses of an absolutely continuous measure by 3-point Simpson per cell.
/// The center cell is excluded (set to 0).
JumpDensity cell_masses(const std::function<double(double)>& density, const Grid& grid);

/// Mass the center cell would carry under the same rule.
double center_cell_mass(const std::function<double(double)>& density, const Grid& grid);

enum class RecoverMethod { newton_log, projected_gradient };

struct RecoverOptions {
    RecoverMethod method = RecoverMethod::newton_log;
    int max_iters = 500;          ///< Newton iterations; projected gradient uses 1000x this
    double grad_tol = 1e-14;
    double floor = 1e-14;
    double armijo_c = 1e-4;
    double shrink = 0.5;
};

struct RecoverResult {
    JumpDensity nu;
    double misfit = 0.0;              ///< sum over j != 0 of (phi_j - phi(nu)_j)^2
    double normalized_residual = 0.0; ///< ||phi - phi(nu)|| / ||phi||
    double grad_norm = 0.0;           ///< projected-gradient norm at exit
    int iterations = 0;
    bool converged = false;
};

/**
 * Minimizes sum_j (phi_j - phi(nu)_j)^2 + alpha * sum_j [nu_j log(nu_j/nu0_j) - nu_j + nu0_j]
 * over nu >= floor (j = 0 excluded).
 *
 * The default solver is a Levenberg-damped Newton iteration in s = log(nu), which
 * keeps nu positive and copes with the ill-conditioning of the tail map.
 * RecoverMethod::projected_gradient runs Barzilai-Borwein projected descent instead.
 *
 * Throws DomainError if alpha <= 0 or a prior entry off the center is nonpositive.
 * Non-convergence is not an error: the best iterate is returned with converged = false.
 */
RecoverResult recover_density(const TailFunction& phi_target, const JumpDensity& nu_prior, double alpha,
                              const Grid& grid, const RecoverOptions& opts = {});

}  // namespace jdlv
