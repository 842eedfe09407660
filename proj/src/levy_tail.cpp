#include "jdlv/levy_tail.hpp"

#include "jdlv/errors.hpp"
#include "jdlv/optim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jdlv {

namespace {

void check_size(std::size_t n, const Grid& grid, const char* what) {
    if (n != static_cast<std::size_t>(grid.nodes())) {
        std::ostringstream msg;
        msg << what << " has " << n << " entries, grid has " << grid.nodes() << " nodes";
        throw ConfigError(msg.str());
    }
}

double simpson_cell(const std::function<double(double)>& f, double y, double dy) {
    return dy / 6.0 * (f(y - 0.5 * dy) + 4.0 * f(y) + f(y + 0.5 * dy));
}

}  // namespace

TailFunction tail_from_density(const JumpDensity& nu, const Grid& grid) {
    check_size(nu.nu.size(), grid, "jump density");
    const int n = grid.nodes();
    const int zc = grid.zero_col();
    TailFunction out = TailFunction::zeros(grid);

    // y < 0: phi_c = e^{y_c} * sum_{l<=c} nu_l - sum_{l<=c} e^{y_l} nu_l
    double mass = 0.0;
    double weighted = 0.0;
    for (int c = 0; c < zc; ++c) {
        const double ey = std::exp(grid.y_at_col(c));
        mass += nu.nu[c];
        weighted += ey * nu.nu[c];
        out.phi[c] = ey * mass - weighted;
    }
    // y > 0: phi_c = sum_{l>=c} e^{y_l} nu_l - e^{y_c} * sum_{l>=c} nu_l
    mass = 0.0;
    weighted = 0.0;
    for (int c = n - 1; c > zc; --c) {
        const double ey = std::exp(grid.y_at_col(c));
        mass += nu.nu[c];
        weighted += ey * nu.nu[c];
        out.phi[c] = weighted - ey * mass;
    }
    return out;
}

std::vector<double> tail_transpose(std::span<const double> g, const Grid& grid) {
    check_size(g.size(), grid, "tail cotangent");
    const int n = grid.nodes();
    const int zc = grid.zero_col();
    std::vector<double> out(n, 0.0);

    double gs = 0.0;
    double gw = 0.0;
    for (int l = zc - 1; l >= 0; --l) {
        const double ey = std::exp(grid.y_at_col(l));
        gs += g[l];
        gw += g[l] * ey;
        out[l] = gw - ey * gs;
    }
    gs = 0.0;
    gw = 0.0;
    for (int l = zc + 1; l < n; ++l) {
        const double ey = std::exp(grid.y_at_col(l));
        gs += g[l];
        gw += g[l] * ey;
        out[l] = ey * gs - gw;
    }
    return out;
}

JumpDensity cell_masses(const std::function<double(double)>& density, const Grid& grid) {
    JumpDensity out = JumpDensity::zeros(grid);
    for (int c = 0; c < grid.nodes(); ++c) {
        if (c == grid.zero_col()) continue;
        out.nu[c] = simpson_cell(density, grid.y_at_col(c), grid.dy());
    }
    return out;
}

double center_cell_mass(const std::function<double(double)>& density, const Grid& grid) {
    return simpson_cell(density, 0.0, grid.dy());
}

RecoverResult recover_density(const TailFunction& phi_target, const JumpDensity& nu_prior, double alpha,
                              const Grid& grid, const RecoverOptions& opts) {
    check_size(phi_target.phi.size(), grid, "target tail");
    check_size(nu_prior.nu.size(), grid, "prior density");
    if (!(alpha > 0.0)) throw DomainError("recover_density needs alpha > 0");
    const int n = grid.nodes();
    const int zc = grid.zero_col();
    for (int c = 0; c < n; ++c) {
        if (c != zc && !(nu_prior.nu[c] > 0.0)) {
            std::ostringstream msg;
            msg << "prior density must be positive off the center, entry at y = " << grid.y_at_col(c) << " is "
                << nu_prior.nu[c];
            throw DomainError(msg.str());
        }
    }

    const auto& target = phi_target.phi;
    const auto& prior = nu_prior.nu;
    double target_norm2 = 0.0;
    for (int c = 0; c < n; ++c)
        if (c != zc) target_norm2 += target[c] * target[c];

    // Data misfit; optionally returns the (model - target) residual with the center zeroed.
    auto misfit_of = [&](std::span<const double> x, std::vector<double>* resid) {
        const TailFunction model = tail_from_density(JumpDensity{{x.begin(), x.end()}}, grid);
        double s = 0.0;
        if (resid) resid->assign(n, 0.0);
        for (int c = 0; c < n; ++c) {
            if (c == zc) continue;
            const double d = model.phi[c] - target[c];
            s += d * d;
            if (resid) (*resid)[c] = d;
        }
        return s;
    };
    auto kl_of = [&](std::span<const double> x) {
        double s = 0.0;
        for (int c = 0; c < n; ++c)
            if (c != zc) s += x[c] * std::log(x[c] / prior[c]) - x[c] + prior[c];
        return s;
    };
    auto gradient_of = [&](std::span<const double> x) {
        std::vector<double> resid;
        misfit_of(x, &resid);
        for (auto& r : resid) r *= 2.0;
        std::vector<double> g = tail_transpose(resid, grid);
        for (int c = 0; c < n; ++c) g[c] = (c == zc) ? 0.0 : g[c] + alpha * std::log(x[c] / prior[c]);
        return g;
    };

    RecoverResult out;
    std::vector<double> x(n, 0.0);
    for (int c = 0; c < n; ++c)
        if (c != zc) x[c] = std::max(prior[c], opts.floor);

    if (opts.method == RecoverMethod::projected_gradient) {
        auto evaluate = [&](std::span<const double> v) {
            return ValueGrad{misfit_of(v, nullptr) + alpha * kl_of(v), gradient_of(v)};
        };
        auto project = [&](std::span<double> v) {
            for (int c = 0; c < n; ++c) v[c] = (c == zc) ? 0.0 : std::max(v[c], opts.floor);
        };
        DescentOptions dopts;
        dopts.max_iters = opts.max_iters * 1000;
        dopts.grad_tol = opts.grad_tol;
        dopts.armijo_c = opts.armijo_c;
        dopts.shrink = opts.shrink;
        dopts.initial_step = 1.0;
        DescentResult run = projected_descent(x, evaluate, project, dopts);
        out.nu.nu = std::move(run.x);
        out.grad_norm = run.grad_norm;
        out.iterations = run.iterations;
        out.converged = run.exit == DescentExit::converged;
    } else {
        // Dense tail operator restricted to the off-center columns.
        std::vector<int> cols;
        for (int c = 0; c < n; ++c)
            if (c != zc) cols.push_back(c);
        const int m = static_cast<int>(cols.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int a = 0; a < m; ++a) {
            const int c = cols[a];
            const double ec = std::exp(grid.y_at_col(c));
            for (int b = 0; b < m; ++b) {
                const int l = cols[b];
                const double el = std::exp(grid.y_at_col(l));
                if (c < zc && l <= c) T(a, b) = ec - el;
                if (c > zc && l >= c) T(a, b) = el - ec;
            }
        }
        const Eigen::MatrixXd TtT2 = 2.0 * T.transpose() * T;
        const double s_floor = std::log(opts.floor);

        auto objective = [&](std::span<const double> v) { return misfit_of(v, nullptr) + alpha * kl_of(v); };
        double f = objective(x);
        double damping = 1e-3;
        int iter = 0;
        for (; iter < opts.max_iters; ++iter) {
            const std::vector<double> gx = gradient_of(x);
            Eigen::VectorXd gs(m);
            Eigen::VectorXd xv(m);
            for (int a = 0; a < m; ++a) {
                xv(a) = x[cols[a]];
                gs(a) = gx[cols[a]] * xv(a);
            }
            // Entries pinned at the floor with an outward gradient do not count.
            double gnorm = 0.0;
            for (int a = 0; a < m; ++a) {
                const bool pinned = std::log(xv(a)) <= s_floor + 1e-12 && gs(a) > 0.0;
                if (!pinned) gnorm = std::max(gnorm, std::abs(gs(a)));
            }
            out.grad_norm = gnorm;
            if (gnorm <= opts.grad_tol) {
                out.converged = true;
                break;
            }
            Eigen::MatrixXd H = xv.asDiagonal() * TtT2 * xv.asDiagonal();
            for (int a = 0; a < m; ++a) H(a, a) += alpha * xv(a) + std::max(gs(a), 0.0);
            const double diag_floor = 1e-30 * H.diagonal().maxCoeff();

            bool improved = false;
            while (damping < 1e20) {
                Eigen::MatrixXd Hd = H;
                for (int a = 0; a < m; ++a) Hd(a, a) += damping * (H(a, a) + diag_floor);
                Eigen::LLT<Eigen::MatrixXd> llt(Hd);
                if (llt.info() == Eigen::Success) {
                    const Eigen::VectorXd d = llt.solve(-gs);
                    std::vector<double> trial = x;
                    for (int a = 0; a < m; ++a)
                        trial[cols[a]] = std::exp(std::max(std::log(xv(a)) + d(a), s_floor));
                    const double ft = objective(trial);
                    if (ft < f) {
                        x = std::move(trial);
                        f = ft;
                        damping = std::max(damping / 3.0, 1e-12);
                        improved = true;
                        break;
                    }
                }
                damping *= 4.0;
            }
            if (!improved) {
                // No decrease is representable: x is a minimizer to working precision.
                out.converged = true;
                break;
            }
        }
        out.nu.nu = std::move(x);
        out.iterations = iter;
    }

    out.misfit = misfit_of(out.nu.nu, nullptr);
    out.normalized_residual = target_norm2 > 0.0 ? std::sqrt(out.misfit / target_norm2) : std::sqrt(out.misfit);
    return out;
}

}  // namespace jdlv
