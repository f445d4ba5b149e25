#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "sps/energy.hpp"
#include "sps/linear_solve.hpp"
#include "sps/parallel.hpp"
#include "sps/random_fields.hpp"

namespace sps {

struct SolveOptions {
    int max_iterations = 3000;
    /// Absolute tolerance on the H^-1 residual; 0 selects
    /// relative_tolerance times the residual of the starting point.
    double gradient_tolerance = 0.0;
    double relative_tolerance = 1e-6;
    double initial_step = 0.5;
    double backtrack_shrink = 0.5;
    int max_backtracks = 60;
    int restarts = 2;
    std::uint64_t seed = 7;
    int threads = 0;  // 0: worker_count()
    double riesz_tol = 1e-10;

    void validate() const {
        require(max_iterations >= 1, ErrorCode::invalid_argument, "max_iterations must be >= 1");
        require(gradient_tolerance >= 0.0 && relative_tolerance > 0.0, ErrorCode::invalid_argument,
                "tolerances must be > 0");
        require(initial_step > 0.0, ErrorCode::invalid_argument, "initial_step must be > 0");
        require(backtrack_shrink > 0.0 && backtrack_shrink < 1.0, ErrorCode::invalid_argument,
                "backtrack_shrink must lie in (0, 1)");
        require(restarts >= 0, ErrorCode::invalid_argument, "restarts must be >= 0");
        require(riesz_tol > 0.0, ErrorCode::invalid_argument, "riesz_tol must be > 0");
    }

    int effective_threads() const { return threads > 0 ? threads : worker_count(); }
};

struct TraceRecord {
    int iteration = 0;
    double I = 0.0;
    double G_abs = 0.0;
    double ps_residual = 0.0;
    double step = 0.0;
};

struct GroundState {
    ScalarField u;
    double m = 0.0;
    double nehari_residual = 0.0;  // |G(u)| / ||u||^2
    double ps_residual = 0.0;      // discrete H^-1 norm of the free gradient
    int iterations = 0;
    bool converged = false;
    double tolerance = 0.0;  // the absolute residual tolerance the run used
    EnergyBreakdown energy;
    std::vector<TraceRecord> trace;
};

inline constexpr double nehari_tolerance = 1e-10;

class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& what, GroundState best)
        : Error(ErrorCode::not_converged, what), best_(std::make_shared<GroundState>(std::move(best))) {}

    const GroundState& best() const { return *best_; }

private:
    std::shared_ptr<GroundState> best_;
};

namespace detail {

inline double dual_norm(const ScalarField& g, const ScalarField& w) {
    return std::sqrt(std::max(dot(g, w), 0.0)) * std::pow(g.grid().spacing(), 1.5);
}

} // namespace detail

/// Discrete H^-1 norm of the free gradient: with (-Delta_h + 1) w = g,
/// returns <g, w>^{1/2} h^{3/2}.
inline double ps_residual(const ScalarField& u, const ProblemParams& params, PoissonCache* cache = nullptr,
                          double riesz_tol = 1e-10) {
    const ScalarField g = gradient(u, params, cache);
    if (dot(g, g) == 0.0) return 0.0;
    return detail::dual_norm(g, solve_h1_riesz(g, riesz_tol));
}

/// Minimises I over the Nehari manifold. Each step moves along the H^1 Riesz
/// representative of the free gradient with a Barzilai-Borwein length,
/// clips to the nonnegative cone when the positive-part functional is in use,
/// and retracts onto the manifold along the ray. Steps that do not decrease
/// the energy are halved. Convergence is declared on the free-gradient
/// residual. A run that stalls or exhausts its budget is returned with
/// converged = false.
inline GroundState minimize_on_nehari(const ScalarField& initial, const ProblemParams& params,
                                      const SolveOptions& opts, PoissonCache* cache = nullptr) {
    params.validate();
    opts.validate();
    PoissonCache local_cache;
    if (!cache) cache = &local_cache;

    const ScalarField start = params.positive_part ? positive_part(initial) : initial;
    RayProjection cur = nehari_project(start, params, cache);
    ScalarField g = gradient_with_potential(cur.tu, cur.potential, params);
    ScalarField w = solve_h1_riesz(g, opts.riesz_tol);
    double res = detail::dual_norm(g, w);
    const double tol = opts.gradient_tolerance > 0.0 ? opts.gradient_tolerance : opts.relative_tolerance * res;

    GroundState out{cur.tu, cur.energy.I, 0.0, res, 0, false, tol, cur.energy, {}};
    out.trace.push_back({0, cur.energy.I, std::abs(cur.energy.G), res, 0.0});

    double alpha = opts.initial_step;
    int it = 0;
    while (res > tol && it < opts.max_iterations) {
        bool accepted = false;
        double step = alpha;
        std::optional<RayProjection> next;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt, step *= opts.backtrack_shrink) {
            ScalarField trial = cur.tu;
            trial.axpy(-step, w);
            if (params.positive_part) trial = positive_part(std::move(trial));
            if (local_power(trial, params) <= 0.0) continue;
            RayProjection proj = nehari_project(trial, params, cache);
            if (std::isfinite(proj.energy.I) && proj.energy.I <= cur.energy.I) {
                next = std::move(proj);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // no descent at machine precision

        ScalarField g_next = gradient_with_potential(next->tu, next->potential, params);
        ScalarField w_next = solve_h1_riesz(g_next, opts.riesz_tol, &w);

        // Barzilai-Borwein length in the H^1 metric.
        const ScalarField s = next->tu - cur.tu;
        const ScalarField y = g_next - g;
        const double sy = dot(s, y);
        const double ss = h1_norm_sq(s).total / s.grid().cell_volume();
        alpha = (sy > 0.0 && ss > 0.0) ? ss / sy : 2.0 * step;
        alpha = std::clamp(alpha, 1e-6, 1e3);

        cur = std::move(*next);
        g = std::move(g_next);
        w = std::move(w_next);
        res = detail::dual_norm(g, w);
        ++it;
        out.trace.push_back({it, cur.energy.I, std::abs(cur.energy.G), res, step});
    }

    out.u = cur.tu;
    out.m = cur.energy.I;
    out.energy = cur.energy;
    out.nehari_residual = std::abs(cur.energy.G) / cur.energy.h1;
    out.ps_residual = res;
    out.iterations = it;
    out.converged = res <= tol && out.nehari_residual <= nehari_tolerance;
    return out;
}

/// Start fields for the ground-state search: a Gaussian of width
/// inradius/3 at the deepest point of the domain, then `restarts` copies
/// multiplied by (1 + xi/2) with seeded xi ~ U[-1, 1].
inline std::vector<ScalarField> ground_state_starts(const GridPtr& grid, const SolveOptions& opts) {
    const auto& dom = grid->domain();
    const ScalarField base = gaussian_bump(grid, dom.deepest_point(), dom.inradius() / 3.0);
    std::vector<ScalarField> starts{base};
    for (int k = 1; k <= opts.restarts; ++k) {
        const ScalarField xi = random_field(grid, opts.seed * 1000003ull + static_cast<std::uint64_t>(k));
        ScalarField f = base;
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= 1.0 + 0.5 * xi[i];
        starts.push_back(std::move(f));
    }
    return starts;
}

/// Lowest-energy converged result over the default start and its seeded
/// perturbations. All runs share one absolute tolerance derived from the
/// unperturbed start, so their results are comparable.
inline GroundState find_ground_state(const GridPtr& grid, const ProblemParams& params, const SolveOptions& opts) {
    params.validate();
    opts.validate();
    const auto starts = ground_state_starts(grid, opts);

    SolveOptions run_opts = opts;
    if (run_opts.gradient_tolerance <= 0.0) {
        const auto proj = nehari_project(params.positive_part ? positive_part(starts.front()) : starts.front(), params);
        run_opts.gradient_tolerance = opts.relative_tolerance * ps_residual(proj.tu, params, nullptr, opts.riesz_tol);
    }

    std::vector<std::optional<GroundState>> runs(starts.size());
    parallel_for(starts.size(), opts.effective_threads(),
                 [&](std::size_t i) { runs[i] = minimize_on_nehari(starts[i], params, run_opts); });

    const GroundState* best = nullptr;
    for (const auto& r : runs)
        if (r->converged && (!best || r->m < best->m)) best = &*r;
    if (best) return *best;

    const GroundState* least = &*runs.front();
    for (const auto& r : runs)
        if (r->m < least->m) least = &*r;
    throw NotConvergedError("no restart converged", *least);
}

} // namespace sps
