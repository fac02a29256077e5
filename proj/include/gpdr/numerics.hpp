#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gpdr/errors.hpp"

namespace gpdr {

/// Dense row-major matrix of doubles.
///
/// Every constructor that takes caller data rejects NaN/Inf. Mutable element
/// access exists for kernels that fill a matrix in place; those kernels are
/// responsible for writing finite values.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (!std::isfinite(fill)) throw InvalidInput("Matrix: non-finite fill value");
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw InvalidInput("Matrix: data length " + std::to_string(data_.size()) +
                               " does not match " + std::to_string(rows_) + "x" +
                               std::to_string(cols_));
        if (!all_finite()) throw InvalidInput("Matrix: non-finite entry");
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.begin()->size();
        std::vector<double> data;
        data.reserve(r * c);
        for (const auto& row : rows) {
            if (row.size() != c) throw InvalidInput("Matrix::from_rows: ragged rows");
            data.insert(data.end(), row.begin(), row.end());
        }
        return Matrix(r, c, std::move(data));
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.front().size();
        std::vector<double> data;
        data.reserve(r * c);
        for (const auto& row : rows) {
            if (row.size() != c) throw InvalidInput("Matrix::from_rows: ragged rows");
            data.insert(data.end(), row.begin(), row.end());
        }
        return Matrix(r, c, std::move(data));
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    const std::vector<double>& data() const noexcept { return data_; }

    bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    Matrix select_rows(std::span<const std::size_t> indices) const {
        Matrix out(indices.size(), cols_);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] >= rows_) throw InvalidInput("Matrix::select_rows: index out of range");
            std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                        out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
        }
        return out;
    }

    Matrix select_cols(std::size_t first, std::size_t count) const {
        if (first + count > cols_) throw InvalidInput("Matrix::select_cols: range out of bounds");
        Matrix out(rows_, count);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < count; ++c) out(r, c) = (*this)(r, first + c);
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw InvalidInput("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                           std::to_string(b.rows()) + ")");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double av = a(i, l);
            if (av == 0.0) continue;
            auto b_row = b.row(l);
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += av * b_row[j];
        }
    }
    return out;
}

/// Eigenpairs of a symmetric matrix; `eigenvectors` holds one eigenvector per column,
/// in the same (descending eigenvalue) order as `eigenvalues`.
struct SymmetricEigen {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

namespace detail {

inline double frobenius(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

inline void check_symmetric(const Matrix& m) {
    if (m.rows() != m.cols()) throw InvalidInput("sym_eigen: matrix is not square");
    double scale = 1.0;
    for (double v : m.data()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-10 * scale)
                throw InvalidInput("sym_eigen: matrix is not symmetric");
}

/// Sort eigenpairs descending and flip each vector so that its largest-magnitude
/// component is nonnegative.
inline SymmetricEigen canonicalize(std::vector<double> values, const Matrix& vectors) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.eigenvalues[c] = values[src];
        double max_abs = 0.0;
        for (std::size_t r = 0; r < n; ++r) max_abs = std::max(max_abs, std::abs(vectors(r, src)));
        double sign = 1.0;
        for (std::size_t r = 0; r < n; ++r) {
            if (std::abs(vectors(r, src)) >= max_abs - 1e-12) {
                sign = vectors(r, src) < 0.0 ? -1.0 : 1.0;
                break;
            }
        }
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = sign * vectors(r, src);
    }
    return out;
}

/// Cyclic Jacobi rotations. Stops when the off-diagonal Frobenius norm drops below
/// 1e-12 relative to the input norm, or fails after `max_sweeps`.
inline SymmetricEigen jacobi_eigen(const Matrix& m, int max_sweeps = 100) {
    check_symmetric(m);
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);
    const double tol = 1e-12 * std::max(frobenius(m), 1e-300);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    bool converged = false;
    for (int sweep = 0; sweep <= max_sweeps; ++sweep) {
        if (off_norm() <= tol) {
            converged = true;
            break;
        }
        if (sweep == max_sweeps) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) throw NumericError("sym_eigen: Jacobi iteration did not converge");

    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
    return canonicalize(std::move(values), v);
}

/// Householder tridiagonalisation + implicit QR (Eigen). Used for matrices too large
/// for Jacobi sweeps to be practical, e.g. the isomap Gram matrix.
inline SymmetricEigen tridiagonal_eigen(const Matrix& m) {
    check_symmetric(m);
    const std::size_t n = m.rows();
    Eigen::MatrixXd em(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            em(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(em);
    if (solver.info() != Eigen::Success)
        throw NumericError("sym_eigen: tridiagonal QR did not converge");
    std::vector<double> values(n);
    Matrix vectors(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        values[c] = solver.eigenvalues()(static_cast<Eigen::Index>(c));
        for (std::size_t r = 0; r < n; ++r)
            vectors(r, c) =
                solver.eigenvectors()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    return canonicalize(std::move(values), vectors);
}

}  // namespace detail

inline constexpr std::size_t kJacobiMaxDimension = 200;

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending.
inline SymmetricEigen sym_eigen(const Matrix& m) {
    if (m.rows() <= kJacobiMaxDimension) return detail::jacobi_eigen(m);
    return detail::tridiagonal_eigen(m);
}

}  // namespace gpdr
