#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sps/energy.hpp"
#include "sps/random_fields.hpp"

namespace sps {

struct PoissonIdentitySample {
    std::uint64_t seed = 0;
    double coupling = 0.0;        // h^3 sum phi u^2
    double green = 0.0;           // h^3 <-Delta_h phi, phi>
    double green_rel_error = 0.0;
    double min_phi_rel = 0.0;     // min phi / ||u||^2
    double gradient_ratio = 0.0;  // dirichlet(phi)^{1/2} / dirichlet(u)
    double residual = 0.0;
    int cg_iterations = 0;
};

/// Green identity, positivity and the gradient bound for seeded uniform
/// random fields on `grid`.
inline std::vector<PoissonIdentitySample> poisson_identity_suite(const GridPtr& grid, int samples, std::uint64_t seed,
                                                                 double tol = default_poisson_tol) {
    std::vector<PoissonIdentitySample> out;
    for (int i = 0; i < samples; ++i) {
        PoissonIdentitySample s;
        s.seed = seed + static_cast<std::uint64_t>(i);
        const ScalarField u = random_field(grid, s.seed);
        const PoissonSolution sol = solve_poisson(u, tol);
        s.coupling = coupling_term(u, sol.phi);
        s.green = inner(apply_laplacian(sol.phi), sol.phi);
        s.green_rel_error = std::abs(s.green - s.coupling) / s.coupling;
        s.min_phi_rel = min_value(sol.phi) / h1_norm_sq(u).total;
        s.gradient_ratio = std::sqrt(s.green) / h1_norm_sq(u).dirichlet;
        s.residual = sol.residual_norm;
        s.cg_iterations = sol.cg_iterations;
        out.push_back(s);
    }
    return out;
}

struct GradientAuditSample {
    std::uint64_t seed = 0;
    double p = 0.0;
    double directional = 0.0;  // h^3 <gradient(u), v>
    double finite_difference = 0.0;
    double rel_error = 0.0;
};

/// Compares h^3 <gradient(u), v> with the central difference
/// (I(u + eps v) - I(u - eps v)) / (2 eps), eps = 1e-5 ||u|| / ||v||, for
/// seeded smooth u and uniform random v. The Poisson tolerance of `params`
/// bounds the attainable agreement, so audits use a tight one.
inline std::vector<GradientAuditSample> gradient_audit(const GridPtr& grid, const ProblemParams& params, int pairs,
                                                       std::uint64_t seed) {
    params.validate();
    std::vector<GradientAuditSample> out;
    for (int i = 0; i < pairs; ++i) {
        GradientAuditSample s;
        s.seed = seed + static_cast<std::uint64_t>(i);
        s.p = params.p;
        const ScalarField u = random_smooth_field(grid, s.seed);
        const ScalarField v = random_field(grid, s.seed ^ 0x9e3779b97f4a7c15ull);
        const double eps = 1e-5 * l2_norm(u) / l2_norm(v);
        s.directional = inner(gradient(u, params), v);
        const double ip = evaluate(u + eps * v, params).I;
        const double im = evaluate(u - eps * v, params).I;
        s.finite_difference = (ip - im) / (2.0 * eps);
        s.rel_error = std::abs(s.directional - s.finite_difference) /
                      std::max(std::abs(s.directional), std::abs(s.finite_difference));
        out.push_back(s);
    }
    return out;
}

} // namespace sps
