#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "msl/grid.hpp"
#include "oracles.hpp"

using namespace msl;

TEST(BuildGrid, SmallestLegalGrid) {
    auto g = build_grid(2, {{0, 1}, {0, 1}}, {3, 3});
    EXPECT_EQ(g->node_count(), 9u);
    EXPECT_EQ(g->interior_count(), 1u);
    EXPECT_DOUBLE_EQ(g->spacing(0), 0.5);
    EXPECT_DOUBLE_EQ(g->spacing(1), 0.5);
    EXPECT_EQ(g->interior_nodes()[0], 4u);
}

TEST(BuildGrid, OneDimensionalInteriorCoordinates) {
    auto g = build_grid(1, {{0, 2}}, {5});
    EXPECT_DOUBLE_EQ(g->spacing(0), 0.5);
    ASSERT_EQ(g->interior_count(), 3u);
    const double expected[] = {0.5, 1.0, 1.5};
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(g->coordinates(g->interior_nodes()[static_cast<std::size_t>(i)])[0], expected[i]);
}

TEST(BuildGrid, Counting65) {
    auto g = oracle::unit_grid(2, 65);
    EXPECT_EQ(g->node_count(), 4225u);
    EXPECT_EQ(g->interior_count(), 3969u);
}

TEST(BuildGrid, BoundaryMaskMatchesIndexRule) {
    auto g = build_grid(3, {{0, 1}, {-1, 1}, {2, 3}}, {4, 5, 3});
    for (std::size_t node = 0; node < g->node_count(); ++node) {
        const auto idx = g->unflatten(node);
        bool edge = false;
        for (int k = 0; k < 3; ++k) edge = edge || idx[static_cast<std::size_t>(k)] == 0 || idx[static_cast<std::size_t>(k)] == g->counts()[static_cast<std::size_t>(k)] - 1;
        EXPECT_EQ(g->is_boundary(node), edge);
        EXPECT_EQ(g->flatten(idx), node);
    }
    EXPECT_EQ(g->interior_count(), 2u * 3u * 1u);
}

TEST(BuildGrid, Rejections) {
    EXPECT_THROW(build_grid(2, {{0, 1}, {0, 1}}, {2, 5}), InvalidInput);
    EXPECT_THROW(build_grid(1, {{0, NAN}}, {5}), InvalidInput);
    EXPECT_THROW(build_grid(1, {{0, INFINITY}}, {5}), InvalidInput);
    EXPECT_THROW(build_grid(1, {{1, 0}}, {5}), InvalidInput);
    EXPECT_THROW(build_grid(0, {}, {}), InvalidInput);
    EXPECT_THROW(build_grid(5, std::vector<Interval>(5), std::vector<int>(5, 3)), InvalidInput);
    EXPECT_THROW(build_grid(2, {{0, 1}}, {5, 5}), InvalidInput);
}

TEST(BuildGrid, QuadratureWeightsIntegrateConstants) {
    auto g = build_grid(2, {{0, 2}, {-1, 0.5}}, {7, 9});
    double sum = 0.0;
    for (std::size_t node = 0; node < g->node_count(); ++node) sum += g->quadrature_weight(node);
    EXPECT_NEAR(sum, g->box_volume(), 1e-14);
    EXPECT_NEAR(g->box_volume(), 3.0, 1e-15);
}

TEST(GridMapTest, RejectsBadShape) {
    auto g = oracle::unit_grid(2, 5);
    EXPECT_THROW(GridMap(g, 0), InvalidInput);
    EXPECT_THROW(GridMap(g, 5), InvalidInput);
    EXPECT_THROW(GridMap(g, 2, std::vector<double>(3)), InvalidInput);
}

TEST(GridMapTest, BoundaryDiscrepancyIgnoresInterior) {
    auto g = oracle::unit_grid(2, 5);
    GridMap a(g, 1), b(g, 1);
    b(12, 0) = 7.0;  // centre node
    EXPECT_EQ(a.boundary_discrepancy(b), 0.0);
    EXPECT_EQ(a.sup_distance(b), 7.0);
    b(0, 0) = -0.25;
    EXPECT_EQ(a.boundary_discrepancy(b), 0.25);
}

TEST(Jacobian, AffineExact) {
    auto g = build_grid(3, {{0, 1}, {-1, 2}, {0, 0.5}}, {5, 7, 4});
    Eigen::MatrixXd A(2, 3);
    A << 0.3, -1.2, 2.0, 0.7, 0.1, -0.4;
    const auto J = jacobian(oracle::affine_map(g, A, Eigen::Vector2d(1.0, -3.0)));
    for (std::size_t node = 0; node < g->node_count(); ++node) {
        EXPECT_LE((J.J[node] - A).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Jacobian, CentredStencilExactOnQuadratics) {
    auto g = oracle::unit_grid(2, 9);
    auto f = GridMap::sample(g, 2, [](std::span<const double> x, std::span<double> out) {
        out[0] = x[0] * x[0];
        out[1] = 0.0;
    });
    const auto J = jacobian(f);
    for (std::size_t node = 0; node < g->node_count(); ++node) {
        EXPECT_NEAR(J.J[node](0, 0), 2 * g->coordinates(node)[0], 1e-13);
    }
}

TEST(Jacobian, SecondOrderUnderRefinement) {
    auto err = [](int N) {
        auto g = build_grid(2, {{0, 1}, {0, 1}}, {N, N});
        auto f = GridMap::sample(g, 2, [](std::span<const double> x, std::span<double> out) {
            out[0] = std::sin(x[0]);
            out[1] = 0.0;
        });
        const auto J = jacobian(f);
        double e = 0.0;
        for (std::size_t node = 0; node < g->node_count(); ++node) {
            e = std::max(e, std::abs(J.J[node](0, 0) - std::cos(g->coordinates(node)[0])));
        }
        return e;
    };
    const double ratio = err(11) / err(21);  // h = 0.1 and 0.05
    EXPECT_GT(ratio, 3.5);
    EXPECT_LT(ratio, 4.5);
}

TEST(SingularSpectrum, IdentityAndRankOne) {
    auto g = oracle::unit_grid(2, 5);
    const auto S = singular_spectrum(jacobian(oracle::affine_map(g, Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero())));
    for (std::size_t node = 0; node < g->node_count(); ++node) {
        EXPECT_NEAR(S.lambda[node][0], 1.0, 1e-13);
        EXPECT_NEAR(S.lambda[node][1], 1.0, 1e-13);
        EXPECT_NEAR(S.two_jacobian[node], 1.0, 1e-13);
    }
    Eigen::MatrixXd R(3, 2);
    R << 1.0, 2.0, -0.5, -1.0, 2.0, 4.0;  // rank one
    const auto S1 = singular_spectrum(jacobian(oracle::affine_map(g, R, Eigen::Vector3d::Zero())));
    for (std::size_t node = 0; node < g->node_count(); ++node) EXPECT_LE(S1.two_jacobian[node], 1e-12);
}

TEST(SingularSpectrum, SortedNonnegative) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 50; ++t) {
        SmallMatrix A(3, 4);
        for (int i = 0; i < 3; ++i) for (int j = 0; j < 4; ++j) A(i, j) = nd(rng);
        const auto s = singular_values(A);
        ASSERT_EQ(s.size(), 3);
        for (int i = 0; i < 3; ++i) EXPECT_GE(s[i], 0.0);
        EXPECT_GE(s[0], s[1]);
        EXPECT_GE(s[1], s[2]);
    }
}

// Brute-force sup over orthonormal 2-frames of |Av ^ Aw|.
static double wedge_sup(const Eigen::MatrixXd& A, std::mt19937_64& rng, int samples) {
    std::normal_distribution<double> nd;
    double best = 0.0;
    const auto n = A.cols();
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd v(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) { v[i] = nd(rng); w[i] = nd(rng); }
        v.normalize();
        w -= w.dot(v) * v;
        w.normalize();
        const Eigen::VectorXd a = A * v, b = A * w;
        best = std::max(best, std::sqrt(std::max(0.0, a.squaredNorm() * b.squaredNorm() - std::pow(a.dot(b), 2))));
    }
    return best;
}

TEST(SingularSpectrum, TwoJacobianMatchesWedgeSup) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int cols : {2, 3}) {
        Eigen::MatrixXd A(3, cols);
        for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = u(rng);
        auto g = oracle::unit_grid(cols, 3);
        const auto S = singular_spectrum(jacobian(oracle::affine_map(g, A, Eigen::Vector3d::Zero())));
        const double brute = wedge_sup(A, rng, 100000);
        EXPECT_NEAR(S.two_jacobian[0], brute, 1e-3 * std::max(1.0, brute)) << "cols=" << cols;
        EXPECT_GE(S.two_jacobian[0] + 1e-12, brute);
    }
}

TEST(InducedMetric, ConstantMapIsFlat) {
    auto g = oracle::unit_grid(2, 5);
    GridMap f(g, 3, std::vector<double>(g->node_count() * 3, 4.2));
    const auto M = induced_metric(f, jacobian(f));
    for (std::size_t node = 0; node < g->node_count(); ++node) {
        EXPECT_LE((M.G[node] - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_NEAR(M.det[node], 1.0, 1e-15);
    }
}

TEST(InducedMetric, SlopeTwoLine) {
    auto g = build_grid(1, {{0, 1}}, {5});
    auto f = GridMap::sample(g, 1, [](std::span<const double> x, std::span<double> out) { out[0] = 2 * x[0]; });
    const auto M = induced_metric(f, jacobian(f));
    EXPECT_NEAR(M.G[2](0, 0), 5.0, 1e-13);
    EXPECT_NEAR(M.G_inv[2](0, 0), 0.2, 1e-14);
    EXPECT_NEAR(M.det[2], 5.0, 1e-13);
}

TEST(InducedMetric, EigenvaluesMatchSingularValues) {
    auto g = oracle::unit_grid(3, 6);
    auto f = GridMap::sample(g, 2, [](std::span<const double> x, std::span<double> out) {
        out[0] = std::sin(2 * x[0] + x[1]) * x[2];
        out[1] = std::exp(x[1] - x[2]) + x[0] * x[0];
    });
    const auto J = jacobian(f);
    const auto S = singular_spectrum(J);
    const auto M = induced_metric(f, J);
    for (std::size_t node = 0; node < g->node_count(); ++node) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(M.G[node]));
        std::vector<double> expect{1.0, 1.0, 1.0};
        for (int i = 0; i < S.lambda[node].size(); ++i) expect[static_cast<std::size_t>(i)] = 1 + S.lambda[node][i] * S.lambda[node][i];
        std::sort(expect.begin(), expect.end());
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(es.eigenvalues()[i], expect[static_cast<std::size_t>(i)], 1e-10 * expect[static_cast<std::size_t>(i)]);
        EXPECT_GE(M.det[node], 1.0);
        EXPECT_NEAR(M.det[node], es.eigenvalues().prod(), 1e-10 * M.det[node]);
        EXPECT_LE((M.G_inv[node] * M.G[node] - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Serialization, RoundTripIsExact) {
    auto g = build_grid(2, {{-0.7, 0.7}, {0, 1}}, {5, 4});
    auto f = GridMap::sample(g, 2, [](std::span<const double> x, std::span<double> out) {
        out[0] = std::sin(x[0]) / 3.0;
        out[1] = std::exp(x[1]) * 1e-7;
    });
    const GridMap back = map_from_json(nlohmann::json::parse(to_json(f).dump()));
    EXPECT_TRUE(back.grid() == f.grid());
    EXPECT_EQ(back.values(), f.values());
}

TEST(Serialization, StrictFields) {
    auto g = oracle::unit_grid(1, 3);
    auto doc = to_json(GridMap(g, 1));
    auto extra = doc;
    extra["colour"] = "blue";
    EXPECT_THROW(map_from_json(extra), InvalidInput);
    auto missing = doc;
    missing.erase("counts");
    EXPECT_THROW(map_from_json(missing), InvalidInput);
    auto wrong = doc;
    wrong["values"] = std::vector<double>{1.0};
    EXPECT_THROW(map_from_json(wrong), InvalidInput);
}
