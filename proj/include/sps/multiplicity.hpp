#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "sps/solver.hpp"

namespace sps {

/// Gradient-energy weighted centroid. Each lattice edge carries
/// h (u_i - u_j)^2, split evenly between its endpoints (equivalently placed
/// at the edge midpoint); edges to boundary nodes count with u_j = 0.
inline Point barycenter(const ScalarField& u) {
    const Grid& grid = u.grid();
    const double h = grid.spacing();
    static constexpr std::array<Point, 6> dir{Point{-1, 0, 0}, Point{1, 0, 0}, Point{0, -1, 0},
                                              Point{0, 1, 0},  Point{0, 0, -1}, Point{0, 0, 1}};
    double total = 0.0;
    Point moment{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Point xi = grid.coordinate(i);
        const auto& nb = grid.neighbors(i);
        for (int d = 0; d < 6; ++d) {
            const int32_t j = nb[d];
            if (j != Grid::ghost && static_cast<std::size_t>(j) < i) continue;  // count interior edges once
            const double diff = u[i] - (j == Grid::ghost ? 0.0 : u[j]);
            const double e = diff * diff;
            if (e == 0.0) continue;
            const Point mid = xi + (0.5 * h) * dir[d];
            total += e;
            for (int a = 0; a < 3; ++a) moment[a] += e * mid[a];
        }
    }
    require(total > 0.0, ErrorCode::zero_field, "barycenter of a field with no gradient energy");
    return (1.0 / total) * moment;
}

// ---------------------------------------------------------------------------
// Inner and outer parallel sets

enum class RegionMembership { inner, collar, outer };

inline std::string to_string(RegionMembership m) {
    switch (m) {
        case RegionMembership::inner: return "inner";
        case RegionMembership::collar: return "collar";
        case RegionMembership::outer: return "outer";
    }
    return "unknown";
}

inline void check_inner_radius(const DomainSpec& domain, double r) {
    require(std::isfinite(r) && r > 0.0, ErrorCode::invalid_argument, "r must be > 0");
    require(r < domain.inradius(), ErrorCode::radius_too_large, "no ball of radius r fits inside the domain");
}

/// inner: d(x, boundary) >= r inside the domain; outer: d(x, domain) > r.
inline RegionMembership omega_r_membership(const DomainSpec& domain, double r, const Point& x) {
    check_inner_radius(domain, r);
    const double sd = domain.signed_distance(x);
    if (sd < 0.0 && -sd >= r) return RegionMembership::inner;
    if (sd > r) return RegionMembership::outer;
    return RegionMembership::collar;
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes; preserves
/// monotonicity of the data. Constant extrapolation outside the knots.
class Pchip {
public:
    Pchip() = default;

    Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        require(n >= 2 && y_.size() == n, ErrorCode::invalid_argument, "interpolation needs two or more knots");
        for (std::size_t i = 1; i < n; ++i)
            require(x_[i] > x_[i - 1], ErrorCode::invalid_argument, "knots must be strictly increasing");

        std::vector<double> hk(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            hk[i] = x_[i + 1] - x_[i];
            delta[i] = (y_[i + 1] - y_[i]) / hk[i];
        }
        d_.assign(n, 0.0);
        if (n == 2) {
            d_[0] = d_[1] = delta[0];
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) continue;
            const double w1 = 2.0 * hk[i] + hk[i - 1];
            const double w2 = hk[i] + 2.0 * hk[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
        d_[0] = end_slope(hk[0], hk[1], delta[0], delta[1]);
        d_[n - 1] = end_slope(hk[n - 2], hk[n - 3], delta[n - 2], delta[n - 3]);
    }

    double operator()(double t) const {
        if (t <= x_.front()) return y_.front();
        if (t >= x_.back()) return y_.back();
        const std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
        const double hk = x_[i + 1] - x_[i];
        const double s = (t - x_[i]) / hk;
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * hk * d_[i] + (-2 * s3 + 3 * s2) * y_[i + 1] +
               (s3 - s2) * hk * d_[i + 1];
    }

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    static double end_slope(double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0)) d = 3.0 * d0;
        return d;
    }

    std::vector<double> x_, y_, d_;
};

// ---------------------------------------------------------------------------
// Transplanted bumps

/// Radial ground state of the ball B_r, computed on a lattice with the same
/// spacing as the target grid.
struct RadialProfile {
    double r = 0.0;
    Pchip profile;       // along the +x axis from the centre, ending with (r, 0)
    double m_ball = 0.0;  // m_{p,r} on the discrete ball
    double radiality = 0.0;  // max_i |u_i - profile(|x_i|)| / max u
    int ball_nodes = 0;

    double operator()(double rho) const { return rho < r ? std::max(profile(rho), 0.0) : 0.0; }
};

/// Computes the ball ground state from centred (radial) data and extracts
/// its profile. Throws NotConvergedError when the ball run does not converge.
inline RadialProfile compute_radial_profile(double r, const ProblemParams& params, double h,
                                            const SolveOptions& opts) {
    params.validate();
    const GridPtr ball = Grid::build_with_spacing(DomainSpec::ball(r), h);
    require(ball->interior_count() > 0, ErrorCode::empty_interior, "ball of radius r has no interior nodes at spacing h");

    SolveOptions run = opts;
    run.threads = 1;
    const ScalarField start = gaussian_bump(ball, {0.0, 0.0, 0.0}, r / 3.0);
    GroundState gs = minimize_on_nehari(start, params, run);
    if (!gs.converged) throw NotConvergedError("ball ground state for the transplant profile did not converge", gs);

    std::vector<double> rho, val;
    for (int k = 0; k * h < r; ++k) {
        const auto idx = ball->nearest_lattice({k * h, 0.0, 0.0});
        const auto node = ball->interior_at(idx[0], idx[1], idx[2]);
        if (!node) break;
        rho.push_back(k * h);
        val.push_back(gs.u[*node]);
    }
    rho.push_back(r);
    val.push_back(0.0);

    RadialProfile out;
    out.r = r;
    out.profile = Pchip(std::move(rho), std::move(val));
    out.m_ball = gs.m;
    out.ball_nodes = static_cast<int>(ball->interior_count());
    const double peak = max_value(gs.u);
    for (std::size_t i = 0; i < gs.u.size(); ++i)
        out.radiality = std::max(out.radiality, std::abs(gs.u[i] - out(norm(ball->coordinate(i)))) / peak);
    return out;
}

/// Profiles keyed by (r, p, lambda, h). Computation happens under the lock,
/// so concurrent requests for one key solve once.
class TransplantCache {
public:
    std::shared_ptr<const RadialProfile> get(double r, const ProblemParams& params, double h,
                                             const SolveOptions& opts) {
        const auto key = std::make_tuple(r, params.p, params.lambda, h);
        std::lock_guard lock(mutex_);
        if (auto it = profiles_.find(key); it != profiles_.end()) return it->second;
        auto prof = std::make_shared<const RadialProfile>(compute_radial_profile(r, params, h, opts));
        profiles_.emplace(key, prof);
        return prof;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return profiles_.size();
    }

private:
    mutable std::mutex mutex_;
    std::map<std::tuple<double, double, double, double>, std::shared_ptr<const RadialProfile>> profiles_;
};

/// Psi_{p,r}(y): the ball ground-state profile placed at y and sampled on the
/// grid, zero outside B_r(y). Not on the Nehari manifold; project before use.
inline ScalarField transplant_bump(const GridPtr& grid, const Point& y, double r, const ProblemParams& params,
                                   TransplantCache& cache, const SolveOptions& opts = {}) {
    require(omega_r_membership(grid->domain(), r, y) == RegionMembership::inner, ErrorCode::outside_inner_set,
            "transplant centre must lie in the inner parallel set");
    const auto prof = cache.get(r, params, grid->spacing(), opts);
    return make_field(grid, [&](const Point& x) { return (*prof)(distance(x, y)); });
}

// ---------------------------------------------------------------------------
// Centre placement

inline double default_transplant_radius(const DomainSpec& domain) { return 0.3 * domain.inradius(); }

/// n quasi-uniform points of the inner parallel set. Shell: a Fibonacci
/// sphere on the mid radius. Other domains: farthest-point sampling of a
/// lattice, seeded at the deepest point.
inline std::vector<Point> inner_centers(const DomainSpec& domain, double r, int n) {
    require(n >= 1, ErrorCode::invalid_argument, "need at least one centre");
    check_inner_radius(domain, r);
    std::vector<Point> out;
    if (domain.kind() == DomainKind::shell) {
        const double rho = 0.5 * (domain.inner_radius() + domain.outer_radius());
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < n; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / n;
            const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double th = golden * i;
            out.push_back({rho * s * std::cos(th), rho * s * std::sin(th), rho * z});
        }
        return out;
    }

    const auto [lo, hi] = domain.bounding_box();
    const double step = domain.inradius() / 8.0;
    std::vector<Point> cand;
    for (double x = lo[0]; x <= hi[0] + 1e-12; x += step)
        for (double y = lo[1]; y <= hi[1] + 1e-12; y += step)
            for (double z = lo[2]; z <= hi[2] + 1e-12; z += step)
                if (omega_r_membership(domain, r, {x, y, z}) == RegionMembership::inner) cand.push_back({x, y, z});
    const Point deep = domain.deepest_point();
    if (omega_r_membership(domain, r, deep) == RegionMembership::inner) cand.push_back(deep);
    require(!cand.empty(), ErrorCode::radius_too_large, "inner parallel set contains no sample points");

    std::vector<double> dmin(cand.size(), std::numeric_limits<double>::infinity());
    std::size_t pick = cand.size() - 1;
    if (omega_r_membership(domain, r, deep) != RegionMembership::inner) {
        pick = 0;
        for (std::size_t i = 1; i < cand.size(); ++i)
            if (distance(cand[i], deep) < distance(cand[pick], deep)) pick = i;
    }
    for (int c = 0; c < n; ++c) {
        out.push_back(cand[pick]);
        for (std::size_t i = 0; i < cand.size(); ++i) dmin[i] = std::min(dmin[i], distance(cand[i], cand[pick]));
        pick = static_cast<std::size_t>(std::max_element(dmin.begin(), dmin.end()) - dmin.begin());
    }
    return out;
}

/// Nearest lattice node to y when it is still in the inner parallel set,
/// otherwise y itself.
inline Point snap_to_lattice(const Grid& grid, double r, const Point& y) {
    const auto ijk = grid.nearest_lattice(y);
    const auto node = grid.interior_at(ijk[0], ijk[1], ijk[2]);
    if (!node) return y;
    const Point x = grid.coordinate(*node);
    return omega_r_membership(grid.domain(), r, x) == RegionMembership::inner ? x : y;
}

// ---------------------------------------------------------------------------
// Catalogue of distinct solutions

struct DedupeTolerances {
    double energy_rel = 1e-4;
    double l2_rel = 5e-2;
};

/// True when both the energies and the fields agree within tolerance,
/// measured against the larger of the two. Symmetric in its arguments.
inline bool same_solution(const GroundState& a, const GroundState& b, const DedupeTolerances& tol) {
    const double de = std::abs(a.m - b.m);
    if (de > tol.energy_rel * std::max(std::abs(a.m), std::abs(b.m))) return false;
    const double scale = std::max(l2_norm(a.u), l2_norm(b.u));
    return l2_norm(a.u - b.u) <= tol.l2_rel * scale;
}

struct CatalogEntry {
    GroundState state;
    Point barycenter{0.0, 0.0, 0.0};
    RegionMembership membership = RegionMembership::collar;
    bool sublevel = false;  // m <= m_{p,r}
    int source = -1;        // index of the start centre, -1 for the ground-state run
};

struct StartRecord {
    Point center{0.0, 0.0, 0.0};
    double transplant_energy = 0.0;  // after Nehari projection
    double m = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string error;
};

struct SolutionCatalog {
    std::vector<CatalogEntry> entries;
    DedupeTolerances tolerances;
    double r = 0.0;
    double m_ground = 0.0;  // lowest energy found
    double m_pr = 0.0;      // ball level m_{p,r}
    double profile_radiality = 0.0;
    int category = 1;
    std::vector<StartRecord> starts;
    std::vector<std::string> orbit_notes;

    std::size_t size() const { return entries.size(); }
};

inline bool entry_order(const CatalogEntry& a, const CatalogEntry& b) {
    if (a.state.m != b.state.m) return a.state.m < b.state.m;
    return a.barycenter < b.barycenter;
}

/// Sorts by energy then barycenter and keeps the first member of each
/// duplicate class. Applying it to its own output changes nothing.
inline std::vector<CatalogEntry> dedupe(std::vector<CatalogEntry> entries, const DedupeTolerances& tol) {
    std::stable_sort(entries.begin(), entries.end(), entry_order);
    std::vector<CatalogEntry> kept;
    for (auto& e : entries) {
        const bool dup = std::any_of(kept.begin(), kept.end(),
                                     [&](const CatalogEntry& k) { return same_solution(k.state, e.state, tol); });
        if (!dup) kept.push_back(std::move(e));
    }
    return kept;
}

/// Pairs of entries with matching energy but distinct fields, as expected
/// from a continuous symmetry of the domain.
inline std::vector<std::string> orbit_notes(const std::vector<CatalogEntry>& entries, const DedupeTolerances& tol) {
    std::vector<std::string> notes;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            const double mi = entries[i].state.m, mj = entries[j].state.m;
            if (std::abs(mi - mj) > tol.energy_rel * std::max(std::abs(mi), std::abs(mj))) continue;
            const Point bi = entries[i].barycenter, bj = entries[j].barycenter;
            const double ni = norm(bi), nj = norm(bj);
            const double angle =
                ni > 0.0 && nj > 0.0
                    ? std::acos(std::clamp((bi[0] * bj[0] + bi[1] * bj[1] + bi[2] * bj[2]) / (ni * nj), -1.0, 1.0))
                    : 0.0;
            notes.push_back("entries " + std::to_string(i) + " and " + std::to_string(j) +
                            ": equal energy, barycenters " + std::to_string(distance(bi, bj)) + " apart (angle " +
                            std::to_string(angle) + " rad); likely one symmetry orbit");
        }
    }
    return notes;
}

struct MultistartOptions {
    DedupeTolerances tolerances;
    double positivity_floor = -1e-12;
};

/// Ground state plus one constrained descent from a transplanted bump at each
/// of n inner centres, snapped to lattice nodes. Runs execute concurrently; the catalogue holds the
/// converged, nonnegative results, deduplicated and sorted. All descents
/// share the absolute residual tolerance of the ground-state run.
inline SolutionCatalog multistart_search(const GridPtr& grid, const ProblemParams& params, double r, int n_centers,
                                         const SolveOptions& opts, TransplantCache* cache = nullptr,
                                         const MultistartOptions& mopts = {}) {
    params.validate();
    opts.validate();
    require(n_centers >= 1, ErrorCode::invalid_argument, "need at least one centre");
    const DomainSpec& domain = grid->domain();
    check_inner_radius(domain, r);
    TransplantCache local;
    if (!cache) cache = &local;

    const GroundState gs = [&] {
        try {
            return find_ground_state(grid, params, opts);
        } catch (const NotConvergedError& e) {
            return e.best();
        }
    }();
    const auto prof = cache->get(r, params, grid->spacing(), opts);

    SolutionCatalog cat;
    cat.tolerances = mopts.tolerances;
    cat.r = r;
    cat.m_pr = prof->m_ball;
    cat.profile_radiality = prof->radiality;
    cat.category = domain.category();

    auto centers = inner_centers(domain, r, n_centers);
    for (auto& c : centers) c = snap_to_lattice(*grid, r, c);
    SolveOptions run = opts;
    run.threads = 1;
    run.gradient_tolerance = gs.tolerance;
    std::vector<std::optional<GroundState>> results(centers.size());
    cat.starts.resize(centers.size());
    parallel_for(centers.size(), opts.effective_threads(), [&](std::size_t i) {
        StartRecord& rec = cat.starts[i];
        rec.center = centers[i];
        try {
            const ScalarField psi = transplant_bump(grid, centers[i], r, params, *cache, opts);
            rec.transplant_energy = nehari_project(psi, params).energy.I;
            results[i] = minimize_on_nehari(psi, params, run);
            rec.m = results[i]->m;
            rec.iterations = results[i]->iterations;
            rec.converged = results[i]->converged;
        } catch (const Error& e) {
            rec.error = e.what();
        }
    });

    std::vector<CatalogEntry> cand;
    auto admit = [&](const GroundState& s, int source) {
        if (!s.converged || min_value(s.u) < mopts.positivity_floor) return;
        const Point b = barycenter(s.u);
        cand.push_back({s, b, omega_r_membership(domain, r, b), false, source});
    };
    admit(gs, -1);
    for (std::size_t i = 0; i < results.size(); ++i)
        if (results[i]) admit(*results[i], static_cast<int>(i));

    cat.entries = dedupe(std::move(cand), cat.tolerances);
    cat.m_ground = gs.m;
    for (const auto& e : cat.entries) cat.m_ground = std::min(cat.m_ground, e.state.m);
    for (auto& e : cat.entries) e.sublevel = e.state.m <= cat.m_pr;
    cat.orbit_notes = orbit_notes(cat.entries, cat.tolerances);
    return cat;
}

} // namespace sps
