#pragma once

#include <cstdint>
#include <cstring>
#include <deque>
#include <mutex>
#include <optional>

#include "sps/grid.hpp"
#include "sps/linear_solve.hpp"

namespace sps {

inline constexpr double default_poisson_tol = 1e-10;

struct PoissonSolution {
    ScalarField phi;
    double residual_norm = 0.0;  // relative: ||u^2 - (-Delta_h) phi|| / ||u^2||
    int cg_iterations = 0;
};

/// Solves -Delta_h phi = u^2 with phi = 0 on the boundary by Jacobi-PCG.
/// `initial` seeds the iteration (it must live on the same grid).
inline PoissonSolution solve_poisson(const ScalarField& u, double tol = default_poisson_tol,
                                     const ScalarField* initial = nullptr) {
    require(tol > 0.0, ErrorCode::invalid_argument, "Poisson tolerance must be > 0");
    std::vector<double> rhs(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = u[i] * u[i];

    ScalarField phi = initial ? *initial : ScalarField(u.grid_ptr());
    if (initial) u.check_grid(*initial);
    const auto rep = solve_shifted_laplacian(u.grid(), 0.0, rhs, phi.values(), tol, default_cg_cap(u.size()));
    if (!rep.converged)
        throw NoConvergenceError("Poisson solve hit the iteration cap", rep.relative_residual, rep.iterations);
    return {std::move(phi), rep.relative_residual, rep.iterations};
}

/// h^3 sum phi_i u_i^2
inline double coupling_term(const ScalarField& u, const ScalarField& phi) {
    u.check_grid(phi);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += phi[i] * u[i] * u[i];
    return u.grid().cell_volume() * s;
}

/// FNV-1a over the grid id and the raw bytes of the values.
inline std::uint64_t content_hash(const ScalarField& u) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const unsigned char* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    const std::uint64_t id = u.grid().id();
    mix(reinterpret_cast<const unsigned char*>(&id), sizeof id);
    mix(reinterpret_cast<const unsigned char*>(u.values().data()), u.size() * sizeof(double));
    return h;
}

/// Small FIFO cache of Poisson solutions keyed by the content of u. Hits are
/// confirmed by exact comparison, so a hash collision cannot return a wrong
/// phi. The most recent phi also serves as the CG warm start. Thread-safe.
class PoissonCache {
public:
    explicit PoissonCache(std::size_t capacity = 4) : capacity_(std::max<std::size_t>(capacity, 1)) {}

    std::optional<ScalarField> find(const ScalarField& u) const {
        const auto key = content_hash(u);
        std::lock_guard lock(mutex_);
        for (const auto& e : entries_) {
            if (e.key == key && e.u.same_grid(u) &&
                std::memcmp(e.u.values().data(), u.values().data(), u.size() * sizeof(double)) == 0) {
                ++hits_;
                return e.phi;
            }
        }
        return std::nullopt;
    }

    void insert(const ScalarField& u, const ScalarField& phi) {
        const auto key = content_hash(u);
        std::lock_guard lock(mutex_);
        if (entries_.size() >= capacity_) entries_.pop_front();
        entries_.push_back({key, u, phi});
    }

    std::optional<ScalarField> warm_start(const ScalarField& u) const {
        std::lock_guard lock(mutex_);
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
            if (it->phi.same_grid(u)) return it->phi;
        return std::nullopt;
    }

    std::size_t hits() const {
        std::lock_guard lock(mutex_);
        return hits_;
    }

private:
    struct Entry {
        std::uint64_t key;
        ScalarField u;
        ScalarField phi;
    };
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::deque<Entry> entries_;
    mutable std::size_t hits_ = 0;
};

/// phi_u through an optional cache; on a miss the most recent cached phi is
/// used as the initial guess.
inline ScalarField cached_poisson(const ScalarField& u, double tol, PoissonCache* cache) {
    if (!cache) return solve_poisson(u, tol).phi;
    if (auto hit = cache->find(u)) return std::move(*hit);
    auto warm = cache->warm_start(u);
    auto sol = solve_poisson(u, tol, warm ? &*warm : nullptr);
    cache->insert(u, sol.phi);
    return std::move(sol.phi);
}

} // namespace sps
