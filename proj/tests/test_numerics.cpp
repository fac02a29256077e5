#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gpdr/numerics.hpp"
#include "oracles.hpp"

using gpdr::Matrix;

namespace {

Matrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
    Matrix a = oracle::random_matrix(n, n, rng);
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

Matrix reconstruct(const gpdr::SymmetricEigen& e) {
    const std::size_t n = e.eigenvalues.size();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < n; ++c) s += e.eigenvectors(i, c) * e.eigenvalues[c] * e.eigenvectors(j, c);
            out(i, j) = s;
        }
    return out;
}

}  // namespace

TEST(Matrix, RejectsNonFiniteEntries) {
    EXPECT_THROW(Matrix(1, 2, std::vector<double>{1.0, NAN}), gpdr::InvalidInput);
    EXPECT_THROW(Matrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), gpdr::InvalidInput);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
    const Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
    EXPECT_EQ(gpdr::matmul(Matrix::identity(2), m), m);
}

TEST(Matmul, RowTimesColumn) {
    const Matrix r = gpdr::matmul(Matrix::from_rows({{1, 2}}), Matrix::from_rows({{3}, {4}}));
    ASSERT_EQ(r.rows(), 1u);
    ASSERT_EQ(r.cols(), 1u);
    EXPECT_EQ(r(0, 0), 11.0);
}

TEST(Matmul, MatchesTripleLoop) {
    std::mt19937_64 rng(7);
    const Matrix a = oracle::random_matrix(5, 4, rng), b = oracle::random_matrix(4, 3, rng);
    EXPECT_LT(max_abs_diff(gpdr::matmul(a, b), oracle::matmul(a, b)), 1e-12);
}

TEST(Matmul, DimensionMismatchThrows) {
    EXPECT_THROW(gpdr::matmul(Matrix(2, 3), Matrix(2, 3)), gpdr::InvalidInput);
}

TEST(Matmul, Associative) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const Matrix a = oracle::random_matrix(4, 5, rng), b = oracle::random_matrix(5, 3, rng),
                     c = oracle::random_matrix(3, 6, rng);
        EXPECT_LT(max_abs_diff(gpdr::matmul(gpdr::matmul(a, b), c), gpdr::matmul(a, gpdr::matmul(b, c))), 1e-9);
    }
}

TEST(SymEigen, Diagonal) {
    const auto e = gpdr::sym_eigen(Matrix::from_rows({{3, 0}, {0, 1}}));
    EXPECT_DOUBLE_EQ(e.eigenvalues[0], 3.0);
    EXPECT_DOUBLE_EQ(e.eigenvalues[1], 1.0);
    EXPECT_DOUBLE_EQ(e.eigenvectors(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(e.eigenvectors(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(e.eigenvectors(1, 0), 0.0);
}

TEST(SymEigen, TwoByTwoClosedForm) {
    const auto e = gpdr::sym_eigen(Matrix::from_rows({{2, 1}, {1, 2}}));
    EXPECT_NEAR(e.eigenvalues[0], 3.0, 1e-12);
    EXPECT_NEAR(e.eigenvalues[1], 1.0, 1e-12);
}

TEST(SymEigen, ReconstructsRandomSymmetric) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        const Matrix s = random_symmetric(6, rng);
        const auto e = gpdr::sym_eigen(s);
        EXPECT_LT(max_abs_diff(reconstruct(e), s), 1e-8);
        double trace = 0.0, sum = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            trace += s(i, i);
            sum += e.eigenvalues[i];
        }
        EXPECT_NEAR(trace, sum, 1e-8);
        const Matrix vtv = gpdr::matmul(e.eigenvectors.transposed(), e.eigenvectors);
        EXPECT_LT(max_abs_diff(vtv, Matrix::identity(6)), 1e-8);
        for (std::size_t i = 1; i < 6; ++i) EXPECT_GE(e.eigenvalues[i - 1], e.eigenvalues[i]);
    }
}

TEST(SymEigen, LargestComponentIsNonnegative) {
    std::mt19937_64 rng(5);
    const auto e = gpdr::sym_eigen(random_symmetric(8, rng));
    for (std::size_t c = 0; c < 8; ++c) {
        double best = 0.0;
        for (std::size_t i = 0; i < 8; ++i)
            if (std::abs(e.eigenvectors(i, c)) > std::abs(best) + 1e-12) best = e.eigenvectors(i, c);
        EXPECT_GE(best, 0.0);
    }
}

TEST(SymEigen, RejectsAsymmetric) {
    EXPECT_THROW(gpdr::sym_eigen(Matrix::from_rows({{1, 2}, {0, 1}})), gpdr::InvalidInput);
}

TEST(SymEigen, LargeRouteAgreesWithJacobi) {
    std::mt19937_64 rng(9);
    const Matrix s = random_symmetric(40, rng);
    const auto a = gpdr::detail::jacobi_eigen(s);
    const auto b = gpdr::detail::tridiagonal_eigen(s);
    for (std::size_t i = 0; i < 40; ++i) EXPECT_NEAR(a.eigenvalues[i], b.eigenvalues[i], 1e-9);
    EXPECT_LT(max_abs_diff(reconstruct(b), s), 1e-8);
    EXPECT_LT(max_abs_diff(a.eigenvectors, b.eigenvectors), 1e-6);
}

TEST(SymEigen, DispatchesAboveJacobiLimit) {
    std::mt19937_64 rng(13);
    const Matrix s = random_symmetric(gpdr::kJacobiMaxDimension + 10, rng);
    const auto e = gpdr::sym_eigen(s);
    EXPECT_LT(max_abs_diff(reconstruct(e), s), 1e-8);
}
