#pragma once

// Independent reference computations for the tests. None of these reuse the
// library's stencil tables or solvers.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sps/sps.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        if (a[k][k] == 0.0) throw std::runtime_error("singular matrix");
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Dense (-Delta_h + shift), assembled from lattice coordinates: a neighbour
/// counts when its lattice point lies strictly inside the domain.
inline Matrix dense_operator(const sps::Grid& g, double shift) {
    const std::size_t n = g.interior_count();
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    Matrix a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = 6.0 * ih2 + shift;
        const auto ijk = g.lattice_index(i);
        const int off[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
        for (const auto& o : off) {
            for (std::size_t j = 0; j < n; ++j) {
                const auto q = g.lattice_index(j);
                if (q[0] == ijk[0] + o[0] && q[1] == ijk[1] + o[1] && q[2] == ijk[2] + o[2]) a[i][j] -= ih2;
            }
        }
    }
    return a;
}

inline std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
    std::vector<double> y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
    return y;
}

/// Dirichlet energy h sum over lattice edges (u_i - u_j)^2 with u = 0 off
/// the interior, by a sweep over the full bounding lattice.
inline double edge_sum_dirichlet(const sps::ScalarField& u) {
    const auto& g = u.grid();
    const auto d = g.dims();
    auto val = [&](int i, int j, int k) -> double {
        if (i < 0 || j < 0 || k < 0 || i >= d[0] || j >= d[1] || k >= d[2]) return 0.0;
        const auto node = g.interior_at(i, j, k);
        return node ? u[*node] : 0.0;
    };
    double s = 0.0;
    for (int i = -1; i < d[0]; ++i)
        for (int j = -1; j < d[1]; ++j)
            for (int k = -1; k < d[2]; ++k) {
                const double c = val(i, j, k);
                s += std::pow(c - val(i + 1, j, k), 2) + std::pow(c - val(i, j + 1, k), 2) +
                     std::pow(c - val(i, j, k + 1), 2);
            }
    return g.spacing() * s;
}

/// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12, int depth = 50) {
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int dep) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (dep <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return rec(lo, mid, flo, flm, fmid, left, dep - 1) + rec(mid, hi, fmid, frm, fhi, right, dep - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

/// Potential of a radial density rho(s) in free space:
/// phi(r) = (1/r) int_0^r rho s^2 ds + int_r^inf rho s ds.
/// Returns int phi rho 4 pi r^2 dr, evaluated on [0, rmax] with rho = 0 beyond.
inline double free_space_coupling(const std::function<double(double)>& rho, double rmax, int n = 20000) {
    const double dr = rmax / n;
    std::vector<double> r(n + 1), f(n + 1), inner(n + 1, 0.0), outer(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
        r[i] = i * dr;
        f[i] = rho(r[i]);
    }
    for (int i = 1; i <= n; ++i)
        inner[i] = inner[i - 1] + 0.5 * dr * (f[i - 1] * r[i - 1] * r[i - 1] + f[i] * r[i] * r[i]);
    for (int i = n - 1; i >= 0; --i) outer[i] = outer[i + 1] + 0.5 * dr * (f[i] * r[i] + f[i + 1] * r[i + 1]);
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double phi = (i == 0 ? 0.0 : inner[i] / r[i]) + outer[i];
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        total += w * dr * 4.0 * M_PI * phi * f[i] * r[i] * r[i];
    }
    return total;
}

// Root of G(t u) = t^2 A + lambda t^4 B - t^p C by a geometric scan over
// [1e-4, 1e4] followed by bisection on G itself.
inline double scan_root(const sps::RayCoefficients& c, int steps = 1000000) {
    auto G = [&](double t) { return t * t * c.A + c.lambda * std::pow(t, 4) * c.B - std::pow(t, c.p) * c.C; };
    const double lo = 1e-4, hi = 1e4;
    const double ratio = std::pow(hi / lo, 1.0 / steps);
    double a = lo;
    for (int i = 0; i < steps; ++i) {
        double b = a * ratio;
        if (G(a) > 0 && G(b) <= 0) {
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (a + b);
                (G(m) > 0 ? a : b) = m;
            }
            return 0.5 * (a + b);
        }
        a = b;
    }
    return std::nan("");
}

} // namespace oracle
