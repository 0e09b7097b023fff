#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "msl/area.hpp"
#include "msl/homotopy.hpp"
#include "msl/numeric.hpp"
#include "msl/solver.hpp"
#include "oracles.hpp"

using namespace msl;

namespace {

GridMap solved(const GridMap& boundary) {
    auto out = solve_dirichlet(harmonic_extension(boundary), SolverConfig{});
    EXPECT_TRUE(out.converged);
    return out.solution;
}

}  // namespace

TEST(LinearHomotopy, ConstantFamily) {
    const GridMap f = oracle::holomorphic(oracle::unit_grid(2, 9), 0.3, 2);
    const auto fam = linear_homotopy(f, f, 5);
    ASSERT_EQ(fam.maps.size(), 5u);
    for (const auto& m : fam.maps) EXPECT_EQ(m.values(), f.values());
    const auto p = area_profile(fam);
    EXPECT_TRUE(std::isnan(p.d2area.front()));
    EXPECT_TRUE(std::isnan(p.d2area.back()));
    for (std::size_t i = 1; i + 1 < p.d2area.size(); ++i) EXPECT_EQ(p.d2area[i], 0.0);
    EXPECT_EQ(p.area_variation, 0.0);
}

TEST(LinearHomotopy, MidpointIsHalfTheBump) {
    auto g = oracle::unit_grid(2, 9);
    const GridMap bump = oracle::interior_only(oracle::sine_bump(g, 2, 0.2));
    const auto fam = linear_homotopy(GridMap(g, 2), bump, 33);
    EXPECT_EQ(fam.t[16], 0.5);
    EXPECT_LE(fam.maps[16].sup_distance(combine(0.5, bump, 0.0, bump)), 1e-16);
    EXPECT_EQ(fam.variation.values(), bump.values());
}

TEST(LinearHomotopy, BoundaryIsBitwiseFromStart) {
    auto g = oracle::unit_grid(2, 9);
    const GridMap f0 = oracle::holomorphic(g, 0.3, 3);
    GridMap f1 = combine(1.0, f0, 1.0, oracle::interior_only(oracle::sine_bump(g, 2, 0.1)));
    // Perturb the far end's boundary below the mismatch threshold.
    f1(0, 0) += 1e-14;
    const auto fam = linear_homotopy(f0, f1, 7);
    for (const auto& m : fam.maps) {
        for (std::size_t node = 0; node < g->node_count(); ++node) {
            if (!g->is_boundary(node)) continue;
            EXPECT_EQ(m(node, 0), f0(node, 0));
            EXPECT_EQ(m(node, 1), f0(node, 1));
        }
    }
}

TEST(LinearHomotopy, Rejections) {
    auto g = oracle::unit_grid(2, 9);
    const GridMap f0(g, 1);
    GridMap f1 = f0;
    f1(0, 0) = 1e-9;
    EXPECT_THROW(linear_homotopy(f0, f1), BoundaryMismatch);
    EXPECT_THROW(linear_homotopy(f0, f0, 2), InvalidInput);
    EXPECT_THROW(linear_homotopy(f0, GridMap(g, 2)), InvalidInput);
}

TEST(AreaProfile, SecondDifferencesMatchDirectEvaluation) {
    auto g = oracle::unit_grid(2, 11);
    Rng rng(7);
    const GridMap f0 = oracle::holomorphic(g, 0.5, 2);
    const GridMap f1 = combine(1.0, f0, 1.0, random_interior_bump(g, 2, rng, 0.3));
    const auto fam = linear_homotopy(f0, f1, 9);
    const auto p = area_profile(fam);
    const double dt = 1.0 / 8;
    for (int k = 1; k < 8; ++k) {
        auto at = [&](double t) { return discrete_area(combine(1.0 - t, f0, t, f1)); };
        const double t = k * dt;
        EXPECT_NEAR(p.areas[k], at(t), 1e-13);
        EXPECT_NEAR(p.d2area[k], (at(t + dt) - 2 * at(t) + at(t - dt)) / (dt * dt), 1e-8);
    }
}

TEST(AreaProfile, MinimalStartPlusBumpIsConvexWithFlatStart) {
    auto g = oracle::unit_grid(2, 17);
    const GridMap f0 = solved(oracle::holomorphic(g, 0.2, 2));
    const GridMap f1 = combine(1.0, f0, 1.0, oracle::interior_only(oracle::sine_bump(g, 2, 0.05)));
    const auto p = area_profile(linear_homotopy(f0, f1));
    EXPECT_TRUE(p.all_distance_decreasing);
    EXPECT_TRUE(p.convex);
    EXPECT_GE(p.min_d2area, -1e-9);
    // A'(0) vanishes at a critical point; the one-sided stencil is second order in dt.
    EXPECT_LE(std::abs(p.d_area_start), 1e-5);
    EXPECT_GT(p.d_area_end, 0.0);
    EXPECT_LE(p.lambda_propagation_defect, 1e-12);
}

TEST(Jacobi, SecondDifferenceIsTwiceEdgeEnergy) {
    auto g = oracle::unit_grid(2, 9);
    Rng rng(12);
    const GridMap f0 = random_smooth_map(g, 2, rng, 0.5);
    const GridMap f1 = combine(1.0, f0, 1.0, random_interior_bump(g, 2, rng, 0.4));
    const auto j = jacobi_norm_convexity(linear_homotopy(f0, f1, 9));
    EXPECT_TRUE(j.passes);
    EXPECT_LE(j.max_defect, 1e-10);
    EXPECT_GE(j.worst_second_difference, -1e-10);
    EXPECT_LE(j.endpoint_excess, 1e-12);
    EXPECT_TRUE(to_json(j).contains("max_defect"));
}

TEST(Uniqueness, AffineAllInitsAgree) {
    auto g = oracle::unit_grid(2, 13);
    Eigen::Matrix2d A;
    A << 0.3, 0.1, -0.2, 0.4;
    UniquenessConfig cfg;
    cfg.seed = 3;
    const auto r = uniqueness_experiment(oracle::affine_map(g, A, Eigen::Vector2d::Zero()), cfg);
    ASSERT_EQ(r.runs.size(), 4u);
    EXPECT_EQ(r.pairs.size(), 6u);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.runs[0].outcome.iterations, 0);
    for (const auto& pr : r.pairs) EXPECT_TRUE(pr.asserted);
    EXPECT_LE(r.max_asserted_difference, 1e-8);
    EXPECT_TRUE(r.violations.empty());
}

TEST(Uniqueness, HolomorphicSmallAmplitude) {
    UniquenessConfig cfg;
    cfg.seed = 8;
    const auto r = uniqueness_experiment(oracle::holomorphic(oracle::unit_grid(2, 17), 0.2, 2), cfg);
    EXPECT_TRUE(r.passed);
    EXPECT_LE(r.max_asserted_difference, 1e-7);
    for (const auto& run : r.runs) EXPECT_TRUE(run.distance_decreasing);
    const auto j = to_json(r);
    EXPECT_EQ(j["pairs"].size(), 6u);
}

TEST(Uniqueness, NonContractingPairsAreNotAsserted) {
    UniquenessConfig cfg;
    cfg.init_count = 2;
    const auto r = uniqueness_experiment(oracle::holomorphic(oracle::unit_grid(2, 13), 1.2, 2), cfg);
    for (const auto& run : r.runs) EXPECT_FALSE(run.distance_decreasing);
    for (const auto& pr : r.pairs) EXPECT_FALSE(pr.asserted);
    EXPECT_TRUE(r.passed);
}

TEST(Uniqueness, NeedsTwoInits) {
    UniquenessConfig cfg;
    cfg.init_count = 1;
    EXPECT_THROW(uniqueness_experiment(GridMap(oracle::unit_grid(2, 5), 1), cfg), InvalidInput);
}

TEST(ProfileCsv, RowsPerT) {
    auto g = oracle::unit_grid(2, 7);
    const auto p = area_profile(linear_homotopy(GridMap(g, 1), oracle::interior_only(oracle::sine_bump(g, 1, 0.1)), 5));
    const auto path = (std::filesystem::temp_directory_path() / "msl_profile_test.csv").string();
    write_profile_csv(p, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("t,area,d2area,sup_lambda_max", 0), 0u);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 5);
}
