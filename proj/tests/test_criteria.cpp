#include <cmath>

#include <gtest/gtest.h>

#include "msl/criteria.hpp"
#include "msl/numeric.hpp"
#include "msl/solver.hpp"
#include "oracles.hpp"

using namespace msl;

namespace {

CriteriaVerdict verdict_of(const GridMap& f, const StabilityReport* st = nullptr) {
    return theorem_report(f, singular_spectrum(jacobian(f)), st);
}

bool has(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

GridMap scaled_identity(int n, double c) {
    return oracle::affine_map(oracle::unit_grid(n, 5), c * Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n));
}

}  // namespace

TEST(DistanceDecreasing, ZeroMapStrictWithRankZero) {
    const auto v = verdict_of(GridMap(oracle::unit_grid(2, 9), 2));
    EXPECT_EQ(v.dd.verdict, DistanceDecreasing::Strict);
    EXPECT_EQ(v.dd.sup_lambda_max, 0.0);
    EXPECT_EQ(v.rank_p, 0);
    EXPECT_TRUE(v.tj.vacuous);
    EXPECT_TRUE(v.minimal);
}

TEST(DistanceDecreasing, IdentityIsNonStrict) {
    const auto v = verdict_of(scaled_identity(2, 1.0));
    EXPECT_EQ(v.dd.verdict, DistanceDecreasing::NonStrict);
    EXPECT_NEAR(v.dd.sup_lambda_max, 1.0, 1e-14);
    EXPECT_EQ(v.rank_p, 2);
    EXPECT_TRUE(v.tj.passes);  // 1*1 <= 1/(2-1)
    EXPECT_TRUE(has(v.applicable, "distance-decreasing-stability"));
    EXPECT_FALSE(has(v.applicable, "strict-distance-decreasing-strict-stability"));
}

TEST(DistanceDecreasing, ExpandingMapFails) {
    EXPECT_EQ(verdict_of(scaled_identity(2, 1.01)).dd.verdict, DistanceDecreasing::Fails);
}

TEST(DistanceDecreasing, HolomorphicSquareSupIsKnown) {
    // 0.2 (x^2 - y^2, 2xy): both singular values equal |0.4 z|, maximal at (1,1).
    const auto v = verdict_of(oracle::holomorphic(oracle::unit_grid(2, 17), 0.4, 2));
    EXPECT_NEAR(v.dd.closure_sup_lambda_max, 0.4 * std::sqrt(2.0), 1e-12);
    // Interior sup sits one node in from the corner.
    const double hi = 1.0 - 1.0 / 16;
    EXPECT_NEAR(v.dd.sup_lambda_max, 0.4 * std::sqrt(2.0) * hi, 1e-12);
    EXPECT_EQ(v.dd.verdict, DistanceDecreasing::Strict);
    EXPECT_EQ(v.rank_p, 2);
    EXPECT_NEAR(v.tj.sup_two_jacobian, v.dd.sup_lambda_max * v.dd.sup_lambda_max, 1e-12);
}

TEST(DistanceDecreasing, NegativeTolRejected) {
    const GridMap f(oracle::unit_grid(2, 5), 1);
    EXPECT_THROW(distance_decreasing_verdict(singular_spectrum(jacobian(f)), f.grid(), -1.0), InvalidInput);
    EXPECT_THROW(rank_estimate(singular_spectrum(jacobian(f)), 0.0), InvalidInput);
    EXPECT_THROW(two_jacobian_verdict(singular_spectrum(jacobian(f)), f.grid(), -1, 0.0), InvalidInput);
}

TEST(TwoJacobian, ScalarTargetIsVacuous) {
    Rng rng(3);
    const GridMap f = random_smooth_map(oracle::unit_grid(2, 9), 1, rng, 3.0);
    const auto v = verdict_of(f);
    EXPECT_LE(v.rank_p, 1);
    EXPECT_TRUE(v.tj.vacuous);
    EXPECT_TRUE(v.tj.passes);
    EXPECT_TRUE(std::isinf(v.tj.bound));
}

TEST(TwoJacobian, RankThreeScaledIdentityFails) {
    // lambda = (0.8, 0.8, 0.8): pairwise products 0.64 exceed 1/(3-1).
    const auto v = verdict_of(scaled_identity(3, 0.8));
    EXPECT_EQ(v.rank_p, 3);
    EXPECT_DOUBLE_EQ(v.tj.bound, 0.5);
    EXPECT_FALSE(v.tj.passes);
    EXPECT_EQ(v.dd.verdict, DistanceDecreasing::Strict);
    EXPECT_FALSE(has(v.applicable, "two-jacobian-stability"));
    EXPECT_DOUBLE_EQ(v.bound_domain, 0.5);
}

TEST(TwoJacobian, RankThresholdIgnoresTinyDirections) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    A(0, 0) = 0.9;
    A(1, 1) = 1e-12;
    const auto v = verdict_of(oracle::affine_map(oracle::unit_grid(2, 5), A, Eigen::Vector2d::Zero()));
    EXPECT_EQ(v.rank_p, 1);
    EXPECT_TRUE(v.tj.vacuous);
}

TEST(TheoremReport, SolvedHolomorphicTags) {
    auto g = oracle::unit_grid(2, 17);
    const auto out = solve_dirichlet(harmonic_extension(oracle::holomorphic(g, 0.2, 2)), SolverConfig{});
    ASSERT_TRUE(out.converged);
    const auto st = stability_index(out.solution);
    const auto v = verdict_of(out.solution, &st);
    EXPECT_TRUE(v.minimal);
    EXPECT_EQ(v.rank_p, 2);
    EXPECT_TRUE(has(v.applicable, "distance-decreasing-stability"));
    EXPECT_TRUE(has(v.applicable, "strict-distance-decreasing-strict-stability"));
    EXPECT_TRUE(has(v.applicable, "two-jacobian-stability"));
    ASSERT_TRUE(v.theta_min.has_value());
    EXPECT_GT(*v.theta_min, 0.0);
    const auto j = to_json(v);
    EXPECT_EQ(j["dd_verdict"], "strict");
    EXPECT_EQ(j["rank_estimate"], 2);
}

TEST(TheoremReport, NegativeThetaWithPassingCriterionIsContradiction) {
    const GridMap f(oracle::unit_grid(2, 9), 2);
    StabilityReport fake = stability_index(f);
    fake.min_eigenvalue = -1.0;
    fake.epsilon = 1e-8;
    EXPECT_THROW(verdict_of(f, &fake), ContradictionDetected);
    fake.min_eigenvalue = -1e-9;
    EXPECT_NO_THROW(verdict_of(f, &fake));
}

TEST(TheoremReport, NonMinimalGetsNoteAndNoTags) {
    Rng rng(11);
    const GridMap f = random_smooth_map(oracle::unit_grid(2, 9), 2, rng, 0.5);
    StabilityReport fake = stability_index(f);
    fake.min_eigenvalue = -1.0;
    const auto v = verdict_of(f, &fake);  // hypotheses not met, so no contradiction
    EXPECT_FALSE(v.minimal);
    EXPECT_TRUE(v.applicable.empty());
    EXPECT_TRUE(has(v.notes, "hypotheses not met: not minimal"));
}
