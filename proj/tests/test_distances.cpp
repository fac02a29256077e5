#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "gpdr/distances.hpp"
#include "oracles.hpp"

using gpdr::DistanceMatrix;
using gpdr::Matrix;

namespace {

Matrix circle(std::size_t n) {
    Matrix x(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        x(i, 0) = std::cos(a);
        x(i, 1) = std::sin(a);
    }
    return x;
}

std::vector<std::vector<double>> dense_adjacency(const gpdr::NeighborGraph& g) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> w(g.size(), std::vector<double>(g.size(), inf));
    for (std::size_t i = 0; i < g.size(); ++i) {
        w[i][i] = 0.0;
        for (const auto& [j, d] : g.adjacency[i]) w[i][j] = std::min(w[i][j], d);
    }
    return w;
}

}  // namespace

TEST(Euclidean, PairwiseMatchesDefinition) {
    const Matrix x = Matrix::from_rows({{0, 0}, {3, 4}, {1, 1}});
    const auto d = gpdr::pairwise_euclidean(x);
    EXPECT_DOUBLE_EQ(d(0, 1), 5.0);
    EXPECT_DOUBLE_EQ(d(1, 0), 5.0);
    EXPECT_DOUBLE_EQ(d(0, 2), std::sqrt(2.0));
    EXPECT_EQ(d(1, 1), 0.0);
}

TEST(DistanceMatrix, SliceKeepsOrder) {
    const auto d = gpdr::pairwise_euclidean(Matrix::from_rows({{0}, {1}, {3}, {7}}));
    const std::vector<std::size_t> idx{3, 0};
    const auto s = d.slice(idx);
    EXPECT_EQ(s.size(), 2u);
    EXPECT_EQ(s(0, 1), 7.0);
    EXPECT_EQ(s(0, 0), 0.0);
}

TEST(NearestRows, TiesByIndexAndExclusion) {
    const Matrix x = Matrix::from_rows({{0}, {1}, {-1}, {2}});
    const std::vector<double> q{0.0};
    EXPECT_EQ(gpdr::nearest_rows(x, q, 3, 0), (std::vector<std::size_t>{1, 2, 3}));
    EXPECT_EQ(gpdr::nearest_rows(x, q, 2), (std::vector<std::size_t>{0, 1}));
}

TEST(Geodesic, CollinearPointsAreEuclidean) {
    Matrix x(8, 2);
    for (std::size_t i = 0; i < 8; ++i) {
        x(i, 0) = 0.5 * static_cast<double>(i * i);
        x(i, 1) = static_cast<double>(i * i);
    }
    const auto g = gpdr::geodesic(x, 2);
    const auto e = gpdr::pairwise_euclidean(x);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(g(i, j), e(i, j), 1e-9);
}

TEST(Geodesic, CircleFollowsTheArc) {
    const std::size_t n = 60;
    const auto g = gpdr::geodesic(circle(n), 2);
    const double chord = 2.0 * std::sin(std::numbers::pi / static_cast<double>(n));
    // Opposite points are n/2 chords apart along the ring.
    EXPECT_NEAR(g(0, n / 2), chord * static_cast<double>(n / 2), 1e-9);
    EXPECT_NEAR(g(0, 10), chord * 10.0, 1e-9);
    EXPECT_GT(g(0, n / 2), 2.0);
}

TEST(Geodesic, MatchesFloydWarshallOnRandomGraphs) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 5; ++t) {
        const Matrix x = oracle::random_matrix(40, 3, rng);
        const auto graph = gpdr::knn_graph(x, 4);
        const auto want = oracle::all_pairs_shortest(dense_adjacency(graph));
        const auto got = gpdr::graph_distances(graph);
        for (std::size_t i = 0; i < 40; ++i)
            for (std::size_t j = 0; j < 40; ++j) EXPECT_NEAR(got(i, j), want[i][j], 1e-9);
    }
}

TEST(Geodesic, MetricProperties) {
    std::mt19937_64 rng(32);
    const Matrix x = oracle::random_matrix(35, 4, rng);
    const auto g = gpdr::geodesic(x, 5);
    const auto e = gpdr::pairwise_euclidean(x);
    for (std::size_t i = 0; i < 35; ++i) {
        EXPECT_EQ(g(i, i), 0.0);
        for (std::size_t j = 0; j < 35; ++j) {
            EXPECT_TRUE(std::isfinite(g(i, j)));
            EXPECT_EQ(g(i, j), g(j, i));
            EXPECT_GE(g(i, j), e(i, j) - 1e-9);
            for (std::size_t k = 0; k < 35; ++k) EXPECT_LE(g(i, j), g(i, k) + g(k, j) + 1e-9);
        }
    }
}

TEST(Geodesic, DisconnectedClustersAreJoined) {
    // Two tight clusters far apart: a 2-NN graph has two components.
    Matrix x(10, 1);
    for (std::size_t i = 0; i < 5; ++i) {
        x(i, 0) = static_cast<double>(i);
        x(i + 5, 0) = 100.0 + static_cast<double>(i);
    }
    const auto g = gpdr::geodesic(x, 2);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j) EXPECT_TRUE(std::isfinite(g(i, j)));
    // The bridge is the closest pair (4, 5), so paths stay on the line.
    EXPECT_NEAR(g(0, 9), 104.0, 1e-9);
}

TEST(Geodesic, NeedsEnoughPoints) {
    EXPECT_THROW(gpdr::knn_graph(Matrix(3, 2), 3), gpdr::InvalidInput);
}

TEST(Geodesic, ThreadCountDoesNotChangeResult) {
    std::mt19937_64 rng(33);
    const Matrix x = oracle::random_matrix(50, 3, rng);
    EXPECT_EQ(gpdr::geodesic(x, 6, 1), gpdr::geodesic(x, 6, 3));
}
