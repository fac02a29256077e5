#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gpdr/numerics.hpp"

namespace gpdr {

/// Linear projection onto the leading covariance eigenvectors.
struct PcaModel {
    std::vector<double> mean;                      // length p
    Matrix components;                             // p x k, orthonormal columns
    std::vector<double> explained_variance;        // length k
    std::vector<double> explained_variance_ratio;  // length k
    std::vector<double> all_variances;             // every covariance eigenvalue, descending
    double total_variance = 0.0;

    std::size_t input_dims() const noexcept { return mean.size(); }
    std::size_t latent_dims() const noexcept { return components.cols(); }
};

namespace detail {

struct Covariance {
    std::vector<double> mean;
    Matrix cov;
};

inline Covariance covariance(const Matrix& x) {
    if (x.rows() == 0) throw InvalidInput("PCA: empty data");
    const std::size_t n = x.rows(), p = x.cols();
    Covariance out{std::vector<double>(p, 0.0), Matrix(p, p)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) out.mean[j] += x(i, j);
    for (double& m : out.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        for (std::size_t a = 0; a < p; ++a) {
            const double da = row[a] - out.mean[a];
            for (std::size_t b = a; b < p; ++b) out.cov(a, b) += da * (row[b] - out.mean[b]);
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            out.cov(a, b) /= static_cast<double>(n);
            out.cov(b, a) = out.cov(a, b);
        }
    return out;
}

inline std::size_t numeric_rank(const std::vector<double>& eigenvalues) {
    const double top = eigenvalues.empty() ? 0.0 : std::max(eigenvalues.front(), 0.0);
    std::size_t rank = 0;
    for (double v : eigenvalues)
        if (v > 1e-10 * std::max(top, 1e-300)) ++rank;
    return rank;
}

inline PcaModel build_pca(Covariance cov, const SymmetricEigen& eig, std::size_t k) {
    PcaModel m;
    m.mean = std::move(cov.mean);
    m.components = eig.eigenvectors.select_cols(0, k);
    for (double v : eig.eigenvalues) m.all_variances.push_back(std::max(v, 0.0));
    for (double v : m.all_variances) m.total_variance += v;
    for (std::size_t c = 0; c < k; ++c) {
        m.explained_variance.push_back(m.all_variances[c]);
        m.explained_variance_ratio.push_back(
            m.total_variance > 0.0 ? m.all_variances[c] / m.total_variance : 0.0);
    }
    return m;
}

}  // namespace detail

/// Fit a k-component PCA. Rejects k larger than the numeric rank of the covariance.
inline PcaModel pca_fit(const Matrix& x, std::size_t k) {
    auto cov = detail::covariance(x);
    const auto eig = sym_eigen(cov.cov);
    const std::size_t rank = detail::numeric_rank(eig.eigenvalues);
    if (k == 0 || k > rank)
        throw InvalidInput("pca_fit: k=" + std::to_string(k) + " exceeds data rank " +
                           std::to_string(rank));
    return detail::build_pca(std::move(cov), eig, k);
}

/// Smallest leading set of components whose cumulative explained variance reaches
/// `variance_fraction`.
inline PcaModel pca_fit_variance(const Matrix& x, double variance_fraction) {
    if (!(variance_fraction > 0.0 && variance_fraction <= 1.0))
        throw InvalidInput("pca_fit_variance: fraction must lie in (0, 1]");
    auto cov = detail::covariance(x);
    const auto eig = sym_eigen(cov.cov);
    double total = 0.0;
    for (double v : eig.eigenvalues) total += std::max(v, 0.0);
    std::size_t k = 0;
    if (total <= 0.0) {
        k = 1;
    } else {
        double cum = 0.0;
        for (double v : eig.eigenvalues) {
            cum += std::max(v, 0.0);
            ++k;
            if (cum / total >= variance_fraction - 1e-12) break;
        }
        k = std::min(k, std::max<std::size_t>(detail::numeric_rank(eig.eigenvalues), 1));
    }
    return detail::build_pca(std::move(cov), eig, k);
}

inline Matrix pca_transform(const PcaModel& m, const Matrix& rows) {
    if (rows.cols() != m.input_dims())
        throw InvalidInput("pca_transform: expected " + std::to_string(m.input_dims()) +
                           " columns, got " + std::to_string(rows.cols()));
    const std::size_t k = m.latent_dims();
    Matrix out(rows.rows(), k);
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        auto r = rows.row(i);
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < r.size(); ++j) s += (r[j] - m.mean[j]) * m.components(j, c);
            out(i, c) = s;
        }
    }
    return out;
}

inline Matrix pca_inverse_transform(const PcaModel& m, const Matrix& scores) {
    if (scores.cols() != m.latent_dims())
        throw InvalidInput("pca_inverse_transform: score width mismatch");
    const std::size_t p = m.input_dims();
    Matrix out(scores.rows(), p);
    for (std::size_t i = 0; i < scores.rows(); ++i)
        for (std::size_t j = 0; j < p; ++j) {
            double s = m.mean[j];
            for (std::size_t c = 0; c < m.latent_dims(); ++c) s += scores(i, c) * m.components(j, c);
            out(i, j) = s;
        }
    return out;
}

}  // namespace gpdr
