#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"

using namespace sps;

TEST(Domain, RejectsInvalidShapes) {
    EXPECT_THROW(DomainSpec::ball(0.0), Error);
    EXPECT_THROW(DomainSpec::shell(1.0, 0.5), Error);
    EXPECT_THROW(DomainSpec::box({1.0, -1.0, 1.0}), Error);
    EXPECT_THROW(DomainSpec::ball_union({}), Error);
}

TEST(Domain, SignedDistances) {
    const auto shell = DomainSpec::shell(0.5, 1.0);
    EXPECT_NEAR(shell.signed_distance({0.75, 0, 0}), -0.25, 1e-15);
    EXPECT_NEAR(shell.signed_distance({0, 0, 0}), 0.5, 1e-15);
    const auto box = DomainSpec::box({1.0, 2.0, 3.0});
    EXPECT_NEAR(box.signed_distance({0, 0, 0}), -1.0, 1e-15);
    EXPECT_NEAR(box.signed_distance({2.0, 3.0, 0.0}), std::sqrt(2.0), 1e-15);
}

TEST(Domain, CategoryMetadata) {
    EXPECT_EQ(DomainSpec::ball(1).category(), 1);
    EXPECT_EQ(DomainSpec::box({1, 1, 1}).category(), 1);
    EXPECT_EQ(DomainSpec::shell(0.5, 1).category(), 2);
    EXPECT_EQ(DomainSpec::ball_union({{{-2, 0, 0}, 1}, {{2, 0, 0}, 1}}).category(), 2);
    EXPECT_EQ(DomainSpec::ball_union({{{-0.5, 0, 0}, 1}, {{0.5, 0, 0}, 1}}).category(), 1);
}

TEST(Grid, RejectsLowResolution) { EXPECT_THROW(build_grid(DomainSpec::ball(1), 7), Error); }

TEST(Grid, BallCentreIsInterior) {
    const auto g = build_grid(DomainSpec::ball(1), 9);
    const auto c = g->nearest_lattice({0, 0, 0});
    ASSERT_TRUE(g->interior_at(c[0], c[1], c[2]).has_value());
    EXPECT_NEAR(norm(g->coordinate(*g->interior_at(c[0], c[1], c[2]))), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(g->spacing(), 0.25);
}

TEST(Grid, ShellExcludesOrigin) {
    const auto g = build_grid(DomainSpec::shell(0.5, 1.0), 9);
    const auto c = g->nearest_lattice({0, 0, 0});
    EXPECT_FALSE(g->interior_at(c[0], c[1], c[2]).has_value());
}

TEST(Grid, InteriorCountMatchesBruteForce) {
    const auto g = build_grid(DomainSpec::ball(1), 33);
    const double h = 2.0 / 32.0;
    std::size_t count = 0;
    for (int i = 0; i < 33; ++i)
        for (int j = 0; j < 33; ++j)
            for (int k = 0; k < 33; ++k) {
                const double x = -1 + i * h, y = -1 + j * h, z = -1 + k * h;
                if (x * x + y * y + z * z < 1.0 - 1e-12) ++count;
            }
    EXPECT_EQ(g->interior_count(), count);
}

TEST(Grid, DistinctGridsDoNotMix) {
    const auto a = build_grid(DomainSpec::ball(1), 9);
    const auto b = build_grid(DomainSpec::ball(1), 9);
    ScalarField u(a), v(b);
    EXPECT_THROW(u += v, Error);
    EXPECT_THROW(dot(u, v), Error);
}

TEST(Laplacian, SpikeStencil) {
    const auto g = build_grid(DomainSpec::ball(1), 17);
    const auto c = g->nearest_lattice({0, 0, 0});
    const std::size_t i = *g->interior_at(c[0], c[1], c[2]);
    ScalarField e(g);
    e[i] = 1.0;
    const ScalarField l = apply_laplacian(e);
    const double ih2 = 1.0 / (g->spacing() * g->spacing());
    EXPECT_DOUBLE_EQ(l[i], 6.0 * ih2);
    int neighbours = 0;
    for (std::size_t n = 0; n < l.size(); ++n) {
        if (n == i) continue;
        if (l[n] != 0.0) {
            EXPECT_DOUBLE_EQ(l[n], -ih2);
            ++neighbours;
        }
    }
    EXPECT_EQ(neighbours, 6);
}

TEST(Laplacian, MatchesDenseAssembly) {
    const auto g = build_grid(DomainSpec::shell(0.5, 1.0), 9);
    const auto a = oracle::dense_operator(*g, 0.0);
    const ScalarField u = random_field(g, 3);
    const auto ref = oracle::matvec(a, std::vector<double>(u.values().begin(), u.values().end()));
    const ScalarField l = apply_laplacian(u);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(l[i], ref[i], 1e-10 * std::abs(ref[i]) + 1e-10);
}

TEST(Laplacian, SymmetricAndPositive) {
    const auto g = build_grid(DomainSpec::box({1, 0.7, 0.5}), 17);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const ScalarField u = random_field(g, s), v = random_field(g, s + 100);
        EXPECT_NEAR(dot(apply_laplacian(u), v), dot(u, apply_laplacian(v)), 1e-9 * std::abs(dot(apply_laplacian(u), v)));
        EXPECT_GT(dot(apply_laplacian(u), u), 0.0);
    }
}

TEST(Integrals, ZeroField) {
    const auto g = build_grid(DomainSpec::ball(1), 9);
    const ScalarField z(g);
    EXPECT_EQ(integrate_power(z, 2.0), 0.0);
    EXPECT_EQ(h1_norm_sq(z).total, 0.0);
}

TEST(Integrals, ConstantFieldVolume) {
    const auto g = build_grid(DomainSpec::box({1, 1, 1}), 33);
    const ScalarField one = make_field(g, [](const Point&) { return 1.0; });
    EXPECT_DOUBLE_EQ(integrate_power(one, 3.0), g->interior_count() * g->cell_volume());
    EXPECT_THROW(integrate_power(one, 0.5), Error);
}

TEST(Integrals, GaussianMatchesRadialQuadrature) {
    const auto g = build_grid(DomainSpec::ball(1), 33);
    const double sigma = 0.2;
    const ScalarField u = gaussian_bump(g, {0, 0, 0}, sigma);
    const double ref = oracle::simpson(
        [&](double r) { return 4 * M_PI * r * r * std::exp(-r * r / (sigma * sigma)); }, 0.0, 1.0, 1e-13);
    EXPECT_NEAR(integrate_power(u, 2.0), ref, 0.02 * ref);
}

TEST(Integrals, DirichletEqualsEdgeSum) {
    const auto g = build_grid(DomainSpec::box({1, 0.8, 0.6}), 17);
    const ScalarField ramp = make_field(g, [](const Point& x) { return 0.3 + x[0] - 2 * x[1] + 0.5 * x[2]; });
    const double ref = oracle::edge_sum_dirichlet(ramp);
    EXPECT_NEAR(h1_norm_sq(ramp).dirichlet, ref, 1e-10 * ref);
}

TEST(Integrals, SecondOrderQuadratureConvergence) {
    // smooth bump supported in |x| < 0.5
    auto bump = [](const Point& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return r2 < 0.25 ? std::pow(0.25 - r2, 4) : 0.0;
    };
    const double exact = oracle::simpson(
        [](double r) { return r < 0.5 ? 4 * M_PI * r * r * std::pow(0.25 - r * r, 8) : 0.0; }, 0.0, 0.5, 1e-16);
    std::vector<double> err;
    for (int res : {17, 33, 65}) err.push_back(std::abs(integrate_power(make_field(build_grid(DomainSpec::ball(1), res), bump), 2.0) - exact));
    EXPECT_GT(err[0], err[1]);
    EXPECT_GT(err[1], err[2]);
    EXPECT_GE(std::log2(err[0] / err[1]), 1.5);
}

TEST(Grid, SpacingBuilderSharesNodes) {
    const auto a = Grid::build_with_spacing(DomainSpec::ball(1), 0.125);
    const auto b = Grid::build_with_spacing(DomainSpec::ball(0.4), 0.125);
    for (std::size_t i = 0; i < b->interior_count(); ++i) {
        const Point x = b->coordinate(i);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(x[k] / 0.125, std::round(x[k] / 0.125), 1e-12);
    }
    EXPECT_GT(a->interior_count(), b->interior_count());
}
