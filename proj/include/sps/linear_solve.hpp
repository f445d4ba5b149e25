#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sps/error.hpp"
#include "sps/grid.hpp"

namespace sps {

struct CgReport {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Default iteration cap: 10 sqrt(n), at least 500.
inline int default_cg_cap(std::size_t n) {
    return std::max(500, static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))));
}

/// Jacobi-preconditioned conjugate gradients for (-Delta_h + shift) x = b on
/// the interior nodes of `grid`. `x` holds the initial guess on entry.
/// Convergence is declared on the true relative residual ||b - A x|| / ||b||;
/// the recursive residual is only used to decide when to check it.
inline CgReport solve_shifted_laplacian(const Grid& grid, double shift, std::span<const double> b, std::span<double> x,
                                        double tol, int max_iter) {
    const std::size_t n = grid.interior_count();
    const double diag = 6.0 / (grid.spacing() * grid.spacing()) + shift;
    const double inv_diag = 1.0 / diag;

    double bnorm2 = 0.0;
    for (double v : b) bnorm2 += v * v;
    CgReport report;
    if (bnorm2 == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        report.converged = true;
        return report;
    }
    const double bnorm = std::sqrt(bnorm2);

    std::vector<double> r(n), z(n), p(n), q(n);
    auto true_residual = [&]() {
        detail::apply_shifted_laplacian(grid, x, q, shift);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = b[i] - q[i];
            s += r[i] * r[i];
        }
        return std::sqrt(s) / bnorm;
    };

    double rel = true_residual();
    while (true) {
        if (rel <= tol) {
            report.relative_residual = rel;
            report.converged = true;
            return report;
        }
        if (report.iterations >= max_iter) break;

        // (Re)start the recursion from the current true residual.
        double rz = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = inv_diag * r[i];
            p[i] = z[i];
            rz += r[i] * z[i];
        }
        while (report.iterations < max_iter) {
            detail::apply_shifted_laplacian(grid, p, q, shift);
            double pq = 0.0;
            for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
            const double alpha = rz / pq;
            double rr = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
                rr += r[i] * r[i];
            }
            ++report.iterations;
            if (std::sqrt(rr) / bnorm <= 0.5 * tol) break;
            double rz_new = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = inv_diag * r[i];
                rz_new += r[i] * z[i];
            }
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        const double updated = true_residual();
        // Stagnation at the rounding floor: give up instead of cycling.
        if (updated >= rel && report.iterations >= max_iter) {
            rel = updated;
            break;
        }
        rel = updated;
    }
    report.relative_residual = rel;
    report.converged = rel <= tol;
    return report;
}

/// Solves (-Delta_h + 1) w = g, the discrete H^1 Riesz map. Throws
/// NoConvergenceError when the cap is hit.
inline ScalarField solve_h1_riesz(const ScalarField& g, double tol, const ScalarField* initial = nullptr) {
    ScalarField w = initial ? *initial : ScalarField(g.grid_ptr());
    if (initial) g.check_grid(*initial);
    const auto rep = solve_shifted_laplacian(g.grid(), 1.0, g.values(), w.values(), tol, default_cg_cap(g.size()));
    if (!rep.converged)
        throw NoConvergenceError("H1 Riesz solve hit the iteration cap", rep.relative_residual, rep.iterations);
    return w;
}

} // namespace sps
