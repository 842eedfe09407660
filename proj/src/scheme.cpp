#include "scheme.hpp"

#include <algorithm>

namespace jdlv::detail {

Tridiagonal implicit_matrix(std::span<const double> a_row, const Grid& grid, double r) {
    const int n = grid.nodes();
    const double eta = grid.eta();
    const double beta = grid.beta();
    Tridiagonal t;
    t.sub.assign(n, 0.0);
    t.diag.assign(n, 1.0);
    t.sup.assign(n, 0.0);
    for (int c = 1; c < n - 1; ++c) {
        const double a = a_row[c];
        t.sub[c] = -0.5 * eta * a - 0.25 * beta * (a + r);
        t.diag[c] = 1.0 + eta * a;
        t.sup[c] = -0.5 * eta * a + 0.25 * beta * (a + r);
    }
    return t;
}

void apply_explicit(std::span<const double> a_row, std::span<const double> u, const Grid& grid, double r,
                    std::span<double> out) {
    const int n = grid.nodes();
    const double eta = grid.eta();
    const double beta = grid.beta();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for (int c = 1; c < n - 1; ++c) {
        const double a = a_row[c];
        out[c] = u[c] + 0.5 * eta * a * (u[c + 1] - 2.0 * u[c] + u[c - 1]) - 0.25 * beta * (a + r) * (u[c + 1] - u[c - 1]);
    }
}

void apply_explicit_transpose(std::span<const double> a_row, std::span<const double> lam, const Grid& grid,
                              double r, std::span<double> out) {
    const int n = grid.nodes();
    const double eta = grid.eta();
    const double beta = grid.beta();
    std::fill(out.begin(), out.end(), 0.0);
    for (int c = 1; c < n - 1; ++c) {
        const double a = a_row[c];
        const double l = lam[c];
        const double up = 0.5 * eta * a - 0.25 * beta * (a + r);
        const double down = 0.5 * eta * a + 0.25 * beta * (a + r);
        out[c] += (1.0 - eta * a) * l;
        if (c + 1 < n - 1) out[c + 1] += up * l;
        if (c - 1 > 0) out[c - 1] += down * l;
    }
}

Convolver::Convolver(const Grid& grid)
    : grid_(grid),
      n_(grid.nodes()),
      c_plus_(grid.beta() - 0.5 * grid.dtau()),
      c_zero_(-2.0 * grid.beta()),
      c_minus_(grid.beta() + 0.5 * grid.dtau()),
      U_(2 * n_ + 1, 0.0),
      D_(2 * n_ - 1, 0.0),
      E_(2 * n_ - 1, 0.0) {}

void Convolver::differences(std::span<const double> u_row, bool zero_extension) {
    const int n = n_;
    for (int p = 0; p < 2 * n + 1; ++p) {
        const int m = p - n;
        if (grid_.contains_j(m)) {
            U_[p] = u_row[grid_.col(m)];
        } else {
            U_[p] = zero_extension ? 0.0 : payoff(grid_.y(m));
        }
    }
    // D at m sits at position m + n - 1 and reads U at positions m + n - 1 .. m + n + 1.
    for (int t = 0; t < 2 * n - 1; ++t) {
        D_[t] = c_plus_ * U_[t + 2] + c_zero_ * U_[t + 1] + c_minus_ * U_[t];
    }
}

void Convolver::apply(std::span<const double> w, std::span<double> out) const {
    const int n = n_;
    out[0] = 0.0;
    out[n - 1] = 0.0;
    // M_jc = sum_kc w[kc] D[jc - kc + n - 1]
    for (int jc = 1; jc < n - 1; ++jc) {
        const double* d = D_.data() + jc + n - 1;
        double s = 0.0;
        for (int kc = 0; kc < n; ++kc) s += w[kc] * d[-kc];
        out[jc] = s;
    }
}

void Convolver::apply_transpose(std::span<const double> w, std::span<const double> lam, std::span<double> out) {
    const int n = n_;
    std::fill(E_.begin(), E_.end(), 0.0);
    for (int jc = 1; jc < n - 1; ++jc) {
        const double l = lam[jc];
        if (l == 0.0) continue;
        double* e = E_.data() + jc + n - 1;
        for (int kc = 0; kc < n; ++kc) e[-kc] += l * w[kc];
    }
    // D position t reads U positions t (c_minus), t + 1 (c_zero), t + 2 (c_plus).
    // Interior column c has signed index m = c + j_lo and U position m + n.
    std::fill(out.begin(), out.end(), 0.0);
    for (int c = 1; c < n - 1; ++c) {
        const int p = c + grid_.j_lo() + n;
        double s = 0.0;
        if (p - 2 >= 0 && p - 2 < 2 * n - 1) s += c_plus_ * E_[p - 2];
        if (p - 1 >= 0 && p - 1 < 2 * n - 1) s += c_zero_ * E_[p - 1];
        if (p >= 0 && p < 2 * n - 1) s += c_minus_ * E_[p];
        out[c] = s;
    }
}

void Convolver::accumulate_weight_gradient(std::span<const double> lam, std::span<double> g) const {
    const int n = n_;
    for (int jc = 1; jc < n - 1; ++jc) {
        const double l = lam[jc];
        if (l == 0.0) continue;
        const double* d = D_.data() + jc + n - 1;
        for (int kc = 0; kc < n; ++kc) g[kc] += l * d[-kc];
    }
}

}  // namespace jdlv::detail
