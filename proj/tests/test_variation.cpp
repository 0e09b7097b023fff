#include <cmath>

#include <gtest/gtest.h>

#include "msl/area.hpp"
#include "msl/numeric.hpp"
#include "msl/solver.hpp"
#include "msl/variation.hpp"
#include "oracles.hpp"

using namespace msl;

namespace {

GridMap solved_holomorphic(int N, double s, int k) {
    auto g = oracle::unit_grid(2, N);
    auto out = solve_dirichlet(harmonic_extension(oracle::holomorphic(g, s, k)), SolverConfig{});
    EXPECT_TRUE(out.converged);
    return out.solution;
}

}  // namespace

TEST(VariationFieldTest, RejectsBoundarySupport) {
    auto g = oracle::unit_grid(2, 5);
    GridMap v(g, 1);
    v(0, 0) = 1e-300;
    EXPECT_THROW(VariationField{v}, InvalidInput);
    v(0, 0) = 0.0;
    v(12, 0) = 1.0;
    EXPECT_NO_THROW(VariationField{v});
}

TEST(FirstVariation, VanishesAtMinimalMaps) {
    auto g = oracle::unit_grid(2, 13);
    const VariationField V(oracle::interior_only(oracle::sine_bump(g, 2, 1.0, 2)));
    Eigen::Matrix2d A;
    A << 0.7, 0.2, -0.3, 0.4;
    EXPECT_LE(std::abs(first_variation(oracle::affine_map(g, A, Eigen::Vector2d::Zero()), V)), 1e-13);
    EXPECT_EQ(first_variation(GridMap(g, 2), V), 0.0);
}

TEST(FirstVariation, MatchesCentralDifference) {
    Rng rng(31);
    auto g = oracle::unit_grid(2, 11);
    for (int t = 0; t < 10; ++t) {
        const GridMap f = random_smooth_map(g, 1 + t % 3, rng, 0.8);
        const VariationField V(random_interior_bump(g, f.target_dim(), rng, 0.5));
        const double an = first_variation(f, V);
        const double fd = oracle::area_fd1(f, V.map(), 1e-5);
        EXPECT_NEAR(an, fd, 1e-7 * std::max(1.0, std::abs(an)));
        // Pairing with the residual gives the same number.
        EXPECT_NEAR(an, -weighted_pairing(minimal_system_residual(f).residual, V.map()), 1e-12 * std::max(1.0, std::abs(an)));
    }
}

TEST(SecondVariation, FlatGraphIsDirichletEnergy) {
    auto g = oracle::unit_grid(2, 9);
    const VariationField V(oracle::interior_only(oracle::sine_bump(g, 1, 1.0)));
    const auto sv = second_variation(GridMap(g, 1), V);
    EXPECT_GT(sv.value, 0.0);
    EXPECT_FALSE(sv.minimal_warning);
    // Discrete Dirichlet energy by corners: mean over the 2^n corners of each cell
    // of |edge differences|^2, times cell volume.
    const double h = g->spacing(0);
    double e = 0.0;
    for (int i = 0; i + 1 < 9; ++i) {
        for (int j = 0; j + 1 < 9; ++j) {
            auto v = [&](int a, int b) { return V.map()(g->flatten({a, b, 0, 0}), 0); };
            const double dx0 = (v(i + 1, j) - v(i, j)) / h, dx1 = (v(i + 1, j + 1) - v(i, j + 1)) / h;
            const double dy0 = (v(i, j + 1) - v(i, j)) / h, dy1 = (v(i + 1, j + 1) - v(i + 1, j)) / h;
            e += 0.25 * h * h * (2 * dx0 * dx0 + 2 * dx1 * dx1 + 2 * dy0 * dy0 + 2 * dy1 * dy1);
        }
    }
    EXPECT_NEAR(sv.value, e, 1e-12 * e);
}

TEST(SecondVariation, ZeroDirection) {
    const GridMap f = solved_holomorphic(13, 0.3, 2);
    EXPECT_EQ(second_variation(f, VariationField::zero(f.grid_ptr(), 2)).value, 0.0);
}

TEST(SecondVariation, MatchesSecondDifferenceAtMinimalMap) {
    const GridMap f = solved_holomorphic(17, 0.6, 3);
    Rng rng(5);
    for (int t = 0; t < 8; ++t) {
        const VariationField V(random_interior_bump(f.grid_ptr(), 2, rng, 0.3));
        const auto sv = second_variation(f, V);
        EXPECT_FALSE(sv.minimal_warning);
        EXPECT_NEAR(sv.value, oracle::area_fd2(f, V.map(), 1e-3), 1e-5 * std::abs(sv.value));
    }
}

TEST(SecondVariation, WarnsAwayFromMinimality) {
    Rng rng(2);
    auto g = oracle::unit_grid(2, 9);
    const GridMap f = random_smooth_map(g, 2, rng, 1.0);
    const auto sv = second_variation(f, VariationField(random_interior_bump(g, 2, rng, 0.1)));
    EXPECT_TRUE(sv.minimal_warning);
    EXPECT_GT(sv.residual_sup, 1e-8);
}

TEST(Hessian, ZeroAndSymmetry) {
    const GridMap f = solved_holomorphic(17, 0.5, 2);
    const auto g = f.grid_ptr();
    const VariationField Z = VariationField::zero(g, 2);
    const VariationField HZ = hessian_apply(f, Z);
    for (double v : HZ.map().values()) EXPECT_EQ(v, 0.0);

    Rng rng(44);
    const Eigen::VectorXd w = variation_weights(f);
    for (int t = 0; t < 5; ++t) {
        const VariationField V(random_interior_bump(g, 2, rng, 1.0)), W(random_interior_bump(g, 2, rng, 1.0));
        const double a = oracle::dot(w, W.map(), hessian_apply(f, V).map());
        const double b = oracle::dot(w, V.map(), hessian_apply(f, W).map());
        EXPECT_LE(std::abs(a - b), 1e-10 * std::max(std::abs(a), std::abs(b)));
        // <V, HV>_w is the second variation.
        const double q = oracle::dot(w, V.map(), hessian_apply(f, V).map());
        EXPECT_NEAR(q, second_variation(f, V).value, 1e-10 * std::abs(q));
    }
}

TEST(Hessian, SparseMatrixMatchesApply) {
    Rng rng(8);
    auto g = build_grid(3, {{0, 1}, {0, 1}, {0, 1}}, {5, 5, 5});
    const GridMap f = random_smooth_map(g, 2, rng, 0.7);
    const auto K = area_hessian(f);
    const Eigen::VectorXd w = variation_weights(f);
    const VariationField V(random_interior_bump(g, 2, rng, 1.0));
    Eigen::VectorXd v(static_cast<Eigen::Index>(g->interior_count() * 2));
    for (std::size_t node : g->interior_nodes()) {
        for (int a = 0; a < 2; ++a) v[g->interior_slot(node) * 2 + a] = V.map()(node, a);
    }
    const Eigen::VectorXd Kv = K * v;
    const GridMap HV = hessian_apply(f, V).map();
    for (std::size_t node : g->interior_nodes()) {
        for (int a = 0; a < 2; ++a) {
            const auto i = g->interior_slot(node) * 2 + a;
            EXPECT_NEAR(Kv[i], w[i] * HV(node, a), 1e-11 * std::max(1.0, std::abs(Kv[i])));
        }
    }
}

TEST(Stability, FlatGraphPositiveAndNearLaplaceEigenvalue) {
    for (int N : {33, 65}) {
        const auto r = stability_index(GridMap(oracle::unit_grid(2, N), 1));
        EXPECT_TRUE(r.converged);
        EXPECT_EQ(r.verdict, StabilityVerdict::Stable);
        EXPECT_EQ(r.index, "0");
        EXPECT_GT(r.min_eigenvalue, 0.0);
        EXPECT_LT(std::abs(r.min_eigenvalue - oracle::two_pi_sq()) / oracle::two_pi_sq(), 0.02) << N;
    }
}

TEST(Stability, FlatEigenvalueApproachesFromBelow) {
    // Discrete Dirichlet Laplacian on the unit square: (8/h^2) sin^2(pi h / 2).
    for (int N : {9, 17}) {
        const double h = 1.0 / (N - 1);
        const double exact = 8.0 / (h * h) * std::pow(std::sin(M_PI * h / 2), 2);
        EXPECT_NEAR(stability_index(GridMap(oracle::unit_grid(2, N), 3)).min_eigenvalue, exact, 1e-8 * exact);
    }
}

TEST(Stability, EigenpairConsistency) {
    const GridMap f = solved_holomorphic(17, 0.6, 3);
    const auto r = stability_index(f);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.residual_norm, 1e-8);
    const auto& v = r.eigenvector.map();
    for (std::size_t node = 0; node < v.node_count(); ++node) {
        if (f.grid().is_boundary(node)) EXPECT_EQ(v(node, 0), 0.0);
    }
    const Eigen::VectorXd w = variation_weights(f);
    const double q = second_variation(f, r.eigenvector).value;
    const double nrm = oracle::dot(w, v, v);
    EXPECT_NEAR(q, r.min_eigenvalue * nrm, 1e-8 * std::abs(q));
}

TEST(Stability, CalibratedGraphBeyondDistanceDecreasing) {
    // s z^2 / 2 with s = 1.2 has |f'| up to 1.2 * sqrt(2) > 1 on the unit square.
    const GridMap f = solved_holomorphic(17, 1.2, 2);
    const auto S = singular_spectrum(jacobian(f));
    double sup = 0.0;
    for (double v : S.lambda_max) sup = std::max(sup, v);
    EXPECT_GT(sup, 1.0);
    const auto r = stability_index(f);
    EXPECT_GE(r.min_eigenvalue, -1e-8 * std::max(1.0, r.median_diagonal));
}
