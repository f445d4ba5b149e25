#pragma once

#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "sps/solver.hpp"

namespace sps {

/// Extremal profile of the critical problem in R^3,
/// U_R(x - a) = (3 R^2)^{1/4} / (R^2 + |x - a|^2)^{1/2}.
struct Instanton {
    double R = 1.0;
    Point a{0.0, 0.0, 0.0};

    double operator()(const Point& x) const {
        const Point d = x - a;
        const double rr = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        return std::pow(3.0 * R * R, 0.25) / std::sqrt(R * R + rr);
    }
};

/// Samples the instanton at interior nodes. No cut-off correction is made,
/// so the Dirichlet mask truncates a positive profile.
inline ScalarField instanton_field(const Instanton& inst, const GridPtr& grid) {
    require(inst.R > 0.0, ErrorCode::invalid_argument, "instanton scale must be > 0");
    return make_field(grid, inst);
}

// ---------------------------------------------------------------------------
// 1D quadrature

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

/// Composite 10-point Gauss-Legendre on [a, b] using about `points` nodes.
template <class F>
double composite_gauss(F&& f, double a, double b, int points) {
    static const auto rule = gauss_legendre(10);
    const int panels = std::max(1, points / 10);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * width;
        double s = 0.0;
        for (int i = 0; i < 10; ++i) s += rule.second[i] * f(lo + 0.5 * width * (rule.first[i] + 1.0));
        total += 0.5 * width * s;
    }
    return total;
}

struct SobolevQuadrature {
    double S = 0.0;
    double grad_energy = 0.0;  // int |grad U|^2
    double crit_norm = 0.0;    // int U^6
    double tail_bound = 0.0;   // relative bound on the discarded tails
};

/// Best Sobolev constant |grad U|_2^2 / |U|_6^2 from the instanton by radial
/// quadrature in s = log(r / R) over [R e^-30, r_cut]. The discarded head
/// and tail are bounded analytically; TailTooLarge is raised when the bound
/// exceeds 1e-8 of either integral.
inline SobolevQuadrature sobolev_constant(int quadrature_points, double R = 1.0, double cut_factor = 1e16) {
    require(quadrature_points >= 1000, ErrorCode::invalid_argument, "need at least 1000 quadrature points");
    require(R > 0.0 && cut_factor > 1.0, ErrorCode::invalid_argument, "bad instanton scale or cut-off");
    constexpr double pi = std::numbers::pi;
    const double sqrt3 = std::sqrt(3.0);
    const double s_lo = -30.0;
    const double s_hi = std::log(cut_factor);

    auto grad = [&](double s) {
        const double r = R * std::exp(s);
        const double q = R * R + r * r;
        return 4.0 * pi * sqrt3 * R * std::pow(r, 5) / (q * q * q);
    };
    auto crit = [&](double s) {
        const double r = R * std::exp(s);
        const double q = R * R + r * r;
        return 4.0 * pi * 3.0 * sqrt3 * R * R * R * r * r * r / (q * q * q);
    };

    SobolevQuadrature out;
    out.grad_energy = composite_gauss(grad, s_lo, s_hi, quadrature_points);
    out.crit_norm = composite_gauss(crit, s_lo, s_hi, quadrature_points);

    // |grad U|^2 <= sqrt3 R r^2 / R^6 near 0 and <= sqrt3 R / r^4 at infinity;
    // U^6 <= 3 sqrt3 / R^3 near 0 and <= 3 sqrt3 R^3 / r^6 at infinity.
    const double r0 = R * std::exp(s_lo);
    const double rc = R * cut_factor;
    const double grad_tail = 4.0 * pi * sqrt3 * (std::pow(r0, 5) / (5.0 * std::pow(R, 5)) + R / rc);
    const double crit_tail = 4.0 * pi * 3.0 * sqrt3 * (r0 * r0 * r0 / (3.0 * R * R * R) + R * R * R / (3.0 * rc * rc * rc));
    out.tail_bound = std::max(grad_tail / out.grad_energy, crit_tail / out.crit_norm);
    require(out.tail_bound <= 1e-8, ErrorCode::tail_too_large, "analytic tail bound exceeds 1e-8 of the integral");

    out.S = out.grad_energy / std::cbrt(out.crit_norm);
    return out;
}

/// Critical ground-state level S^{3/2} / 3.
inline double critical_level(double S) { return std::pow(S, 1.5) / 3.0; }

struct CriticalEnergy {
    double I_star = 0.0;
    double G_star = 0.0;
};

/// I_*(u) = ||u||^2 / 2 - |u|_6^6 / 6 and G_*(u) = ||u||^2 - |u|_6^6.
inline CriticalEnergy critical_energy(const ScalarField& u) {
    const double A = h1_norm_sq(u).total;
    const double B = integrate_power(u, 6.0);
    return {0.5 * A - B / 6.0, A - B};
}

/// max_{t>0} I_*(t u) = (A / B^{1/3})^{3/2} / 3.
inline double critical_ray_max(const ScalarField& u) {
    const double A = h1_norm_sq(u).total;
    const double B = integrate_power(u, 6.0);
    require(B > 0.0, ErrorCode::zero_field, "critical ray maximum of the zero field");
    return std::pow(A / std::cbrt(B), 1.5) / 3.0;
}

struct ConcentrationReport {
    double R_est = 0.0;
    Point center{0.0, 0.0, 0.0};
    double peak = 0.0;
};

/// Best-fit instanton scale from the peak: U_R(0) = 3^{1/4} R^{-1/2}, so
/// R = sqrt(3) / peak^2. Diagnostic only.
inline ConcentrationReport concentration_diagnostic(const ScalarField& u) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < u.size(); ++i)
        if (u[i] > u[arg]) arg = i;
    require(u[arg] > 0.0, ErrorCode::zero_field, "concentration diagnostic needs a positive maximum");
    ConcentrationReport rep;
    rep.peak = u[arg];
    rep.center = u.grid().coordinate(arg);
    rep.R_est = std::sqrt(3.0) / (rep.peak * rep.peak);
    return rep;
}

// ---------------------------------------------------------------------------
// p-sweeps

struct SweepRecord {
    double p = 0.0;
    double lambda = 0.0;
    int resolution = 0;
    double m_p = 0.0;
    double m_tilde_p = 0.0;
    double t_star_simple = 0.0;  // (|u|_p^p / |u|_6^6)^{1/4}
    double t_star_full = 0.0;    // (||u||^2 / |u|_6^6)^{1/4}: the N_* projection
    double R_est = 0.0;
    int iterations = 0;
    bool converged = false;
    double runtime_s = 0.0;
    double h1_norm = 0.0;  // ||u_p||
};

inline int grid_resolution(const Grid& grid) {
    const auto& d = grid.dims();
    return std::max({d[0], d[1], d[2]});
}

/// Scalar summaries of one ground state against the critical Nehari manifold.
inline SweepRecord summarize_ground_state(const GroundState& gs, const ProblemParams& params, const Grid& grid) {
    SweepRecord rec;
    rec.p = params.p;
    rec.lambda = params.lambda;
    rec.resolution = grid_resolution(grid);
    rec.m_p = gs.m;
    const double crit = integrate_power(gs.u, 6.0);
    rec.t_star_full = std::pow(gs.energy.h1 / crit, 0.25);
    rec.t_star_simple = std::pow(gs.energy.lp / crit, 0.25);
    rec.R_est = concentration_diagnostic(gs.u).R_est;
    rec.iterations = gs.iterations;
    rec.converged = gs.converged;
    rec.h1_norm = std::sqrt(gs.energy.h1);
    return rec;
}

namespace detail {

inline GroundState ground_state_or_best(const GridPtr& grid, const ProblemParams& params, const SolveOptions& opts) {
    try {
        return find_ground_state(grid, params, opts);
    } catch (const NotConvergedError& e) {
        return e.best();
    }
}

} // namespace detail

/// For each p: ground state with the given lambda and with lambda = 0.
/// Entries run concurrently; each ground-state search is serial inside, so
/// records do not depend on the thread count. Non-converged entries are
/// flagged and the sweep continues. Records are sorted by p.
inline std::vector<SweepRecord> sweep_p(const GridPtr& grid, const ProblemParams& base, std::vector<double> p_list,
                                        const SolveOptions& opts) {
    for (double p : p_list) base.with_p(p).validate();
    std::sort(p_list.begin(), p_list.end());
    SolveOptions inner = opts;
    inner.threads = 1;

    std::vector<SweepRecord> records(p_list.size());
    parallel_for(p_list.size(), opts.effective_threads(), [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const ProblemParams params = base.with_p(p_list[i]);
        const GroundState gs = detail::ground_state_or_best(grid, params, inner);
        const GroundState tilde = detail::ground_state_or_best(grid, params.with_lambda(0.0), inner);
        SweepRecord rec = summarize_ground_state(gs, params, *grid);
        rec.m_tilde_p = tilde.m;
        rec.converged = gs.converged && tilde.converged;
        rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        records[i] = rec;
    });
    return records;
}

} // namespace sps
