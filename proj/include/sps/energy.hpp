#pragma once

#include <cmath>
#include <string>

#include "sps/grid.hpp"
#include "sps/poisson.hpp"

namespace sps {

/// Parameters of -Delta u + u + lambda phi u = |u|^{p-2} u. The frequency is
/// fixed to one. lambda = 0 gives the decoupled comparison problem.
struct ProblemParams {
    double lambda = 1.0;
    double p = 5.0;
    bool positive_part = true;  // use (u^+)^p in the local term
    double poisson_tol = default_poisson_tol;

    static constexpr double omega = 1.0;
    static constexpr double critical_exponent = 6.0;

    void validate() const {
        require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::invalid_argument, "lambda must be >= 0");
        require(std::isfinite(p) && p > 4.0 && p < critical_exponent, ErrorCode::invalid_argument,
                "p must lie in (4, 6)");
        require(poisson_tol > 0.0, ErrorCode::invalid_argument, "poisson_tol must be > 0");
    }

    ProblemParams with_lambda(double l) const {
        ProblemParams q = *this;
        q.lambda = l;
        return q;
    }

    ProblemParams with_p(double e) const {
        ProblemParams q = *this;
        q.p = e;
        return q;
    }
};

struct EnergyBreakdown {
    double dirichlet = 0.0;
    double mass = 0.0;
    double h1 = 0.0;        // ||u||^2
    double coupling = 0.0;  // int phi_u u^2 (not computed, and reported 0, when lambda == 0)
    double lp = 0.0;        // |u|_p^p, or |u^+|_p^p
    double I = 0.0;
    double G = 0.0;
    double I_constrained = 0.0;  // value of I on the Nehari manifold form
};

inline EnergyBreakdown compose_energy(double dirichlet, double mass, double coupling, double lp,
                                      const ProblemParams& params) {
    const double p = params.p;
    EnergyBreakdown e;
    e.dirichlet = dirichlet;
    e.mass = mass;
    e.h1 = dirichlet + mass;
    e.coupling = coupling;
    e.lp = lp;
    e.I = 0.5 * e.h1 + 0.25 * params.lambda * coupling - lp / p;
    e.G = e.h1 + params.lambda * coupling - lp;
    e.I_constrained = (p - 2.0) / (2.0 * p) * e.h1 + params.lambda * (p - 4.0) / (4.0 * p) * coupling;
    return e;
}

inline double local_power(const ScalarField& u, const ProblemParams& params) {
    if (!params.positive_part) return integrate_power(u, params.p);
    double s = 0.0;
    for (double v : u.values())
        if (v > 0.0) s += detail::pow_abs(v, params.p);
    return u.grid().cell_volume() * s;
}

/// phi_u, or nullopt when lambda == 0 (the coupling never enters).
inline std::optional<ScalarField> potential_for(const ScalarField& u, const ProblemParams& params,
                                                PoissonCache* cache) {
    if (params.lambda == 0.0) return std::nullopt;
    return cached_poisson(u, params.poisson_tol, cache);
}

inline EnergyBreakdown evaluate_with_potential(const ScalarField& u, const std::optional<ScalarField>& phi,
                                               const ProblemParams& params) {
    const H1Norm n = h1_norm_sq(u);
    const double coupling = phi ? coupling_term(u, *phi) : 0.0;
    return compose_energy(n.dirichlet, n.mass, coupling, local_power(u, params), params);
}

/// All terms of the functional at u, using one Poisson solve.
inline EnergyBreakdown evaluate(const ScalarField& u, const ProblemParams& params, PoissonCache* cache = nullptr) {
    params.validate();
    return evaluate_with_potential(u, potential_for(u, params, cache), params);
}

/// Nodal free gradient -Delta_h u + u + lambda phi u - |u|^{p-2} u (or
/// -(u^+)^{p-1}); the derivative of the discrete functional in direction v
/// is h^3 <gradient, v>.
inline ScalarField gradient_with_potential(const ScalarField& u, const std::optional<ScalarField>& phi,
                                           const ProblemParams& params) {
    ScalarField g(u.grid_ptr());
    detail::apply_shifted_laplacian(u.grid(), u.values(), g.values(), ProblemParams::omega);
    const double q = params.p - 1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u[i];
        if (phi) g[i] += params.lambda * (*phi)[i] * v;
        if (params.positive_part) {
            if (v > 0.0) g[i] -= detail::pow_abs(v, q);
        } else {
            g[i] -= std::copysign(detail::pow_abs(v, q), v);
        }
    }
    return g;
}

inline ScalarField gradient(const ScalarField& u, const ProblemParams& params, PoissonCache* cache = nullptr) {
    params.validate();
    return gradient_with_potential(u, potential_for(u, params, cache), params);
}

// ---------------------------------------------------------------------------
// Ray geometry. Along t -> t u the terms scale as t^2 A, t^4 B, t^p C with
// A = ||u||^2, B = int phi_u u^2, C = |u|_p^p.

struct RayCoefficients {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double lambda = 0.0;
    double p = 0.0;

    /// g(t) / t^2; strictly decreasing in t when p > 4.
    double reduced(double t) const { return A / (t * t) + lambda * B - C * std::pow(t, p - 4.0); }
    double G(double t) const { return t * t * A + lambda * std::pow(t, 4.0) * B - std::pow(t, p) * C; }
    double I(double t) const { return 0.5 * t * t * A + 0.25 * lambda * std::pow(t, 4.0) * B - std::pow(t, p) * C / p; }
};

/// Unique t > 0 with G(t u) = 0: log-space bisection on g(t)/t^2 to relative
/// width 1e-12, then one Newton step on G.
inline double solve_ray(const RayCoefficients& c) {
    require(c.C > 0.0, ErrorCode::degenerate_ray, "the local term vanishes along this ray");
    require(c.A > 0.0, ErrorCode::degenerate_ray, "zero field has no Nehari point");
    double lo = 1e-8;
    double hi = 1.0;
    while (c.reduced(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        require(hi <= 0x1p64, ErrorCode::degenerate_ray, "no sign change of G along the ray below 2^64");
    }
    while (hi / lo - 1.0 > 1e-12) {
        const double mid = std::sqrt(lo * hi);
        if (c.reduced(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double t = std::sqrt(lo * hi);
    const double dG = 2.0 * t * c.A + 4.0 * c.lambda * t * t * t * c.B - c.p * std::pow(t, c.p - 1.0) * c.C;
    const double polished = dG != 0.0 ? t - c.G(t) / dG : t;
    // Keep the polish only when it lands inside the bracket.
    return (polished >= lo && polished <= hi) ? polished : t;
}

struct RayProjection {
    double t = 1.0;
    ScalarField tu;
    EnergyBreakdown energy;                // at t u
    std::optional<ScalarField> potential;  // phi_{t u} = t^2 phi_u
};

inline RayCoefficients ray_coefficients(const EnergyBreakdown& e, const ProblemParams& params) {
    return {e.h1, e.coupling, e.lp, params.lambda, params.p};
}

/// Rescales u onto the Nehari manifold along its ray.
inline RayProjection nehari_project(const ScalarField& u, const ProblemParams& params, PoissonCache* cache = nullptr) {
    params.validate();
    auto phi = potential_for(u, params, cache);
    const EnergyBreakdown e = evaluate_with_potential(u, phi, params);
    const double t = solve_ray(ray_coefficients(e, params));

    RayProjection out{t, t * u, {}, std::nullopt};
    const double t2 = t * t;
    const double tp = std::pow(t, params.p);
    out.energy = compose_energy(t2 * e.dirichlet, t2 * e.mass, t2 * t2 * e.coupling, tp * e.lp, params);
    if (phi) {
        out.potential = t2 * std::move(*phi);
        if (cache) cache->insert(out.tu, *out.potential);
    }
    return out;
}

/// max_{t>0} I(t u), attained at the Nehari point of the ray.
inline double ray_max_energy(const ScalarField& u, const ProblemParams& params, PoissonCache* cache = nullptr) {
    return nehari_project(u, params, cache).energy.I;
}

} // namespace sps
