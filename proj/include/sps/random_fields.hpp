#pragma once

#include <cstdint>
#include <random>

#include "sps/grid.hpp"

namespace sps {

/// Isotropic Gaussian exp(-|x-c|^2 / (2 sigma^2)) sampled on interior nodes.
inline ScalarField gaussian_bump(const GridPtr& grid, const Point& center, double sigma, double amplitude = 1.0) {
    const double inv = 1.0 / (2.0 * sigma * sigma);
    return make_field(grid, [&](const Point& x) {
        const Point d = x - center;
        return amplitude * std::exp(-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * inv);
    });
}

/// I.i.d. uniform nodal values in [lo, hi].
inline ScalarField random_field(const GridPtr& grid, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    ScalarField f(grid);
    for (double& v : f.values()) v = dist(rng);
    return f;
}

/// Sum of a few positive Gaussian bumps at random interior positions with
/// random widths; a smooth nonnegative test field.
inline ScalarField random_smooth_field(const GridPtr& grid, std::uint64_t seed, int bumps = 3) {
    std::mt19937_64 rng(seed);
    const double scale = grid->domain().inradius();
    std::uniform_int_distribution<std::size_t> pick(0, grid->interior_count() - 1);
    std::uniform_real_distribution<double> width(0.15 * scale, 0.5 * scale);
    std::uniform_real_distribution<double> amp(0.5, 1.5);
    ScalarField f(grid);
    for (int b = 0; b < bumps; ++b) {
        const Point c = grid->coordinate(pick(rng));
        const double s = width(rng);
        const double a = amp(rng);
        f += gaussian_bump(grid, c, s, a);
    }
    return f;
}

} // namespace sps
