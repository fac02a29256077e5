#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gpdr/distances.hpp"
#include "gpdr/errors.hpp"
#include "gpdr/numerics.hpp"

namespace gpdr {

struct IsomapModel {
    Matrix train;                     // n x p fitted rows
    DistanceMatrix geodesics;         // n x n over the training graph
    Matrix eigenvectors;              // n x k
    std::vector<double> eigenvalues;  // k, positive
    std::vector<double> mean_sq;      // column means of squared geodesics
    Matrix embedding;                 // n x k fitted coordinates
    std::size_t n_neighbors = 10;

    std::size_t input_dims() const noexcept { return train.cols(); }
    std::size_t latent_dims() const noexcept { return eigenvalues.size(); }
};

/// Classical MDS on geodesic distances.
inline IsomapModel isomap_fit(const Matrix& x, std::size_t k, std::size_t n_neighbors = 10) {
    if (k == 0) throw InvalidInput("isomap_fit: k must be positive");
    const std::size_t n = x.rows();
    if (k >= n) throw InvalidInput("isomap_fit: k must be below the number of rows");
    IsomapModel m;
    m.train = x;
    m.n_neighbors = n_neighbors;
    m.geodesics = geodesic(x, n_neighbors);

    Matrix sq(n, n);
    m.mean_sq.assign(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double g = m.geodesics(i, j);
            sq(i, j) = g * g;
            m.mean_sq[j] += g * g;
        }
    for (double& v : m.mean_sq) {
        v /= static_cast<double>(n);
        grand += v;
    }
    grand /= static_cast<double>(n);
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = -0.5 * (sq(i, j) - m.mean_sq[i] - m.mean_sq[j] + grand);
    for (std::size_t i = 0; i < n; ++i)  // exact symmetry for the solver
        for (std::size_t j = i + 1; j < n; ++j) b(j, i) = b(i, j);

    const SymmetricEigen eig = sym_eigen(b);
    const double top = std::max(eig.eigenvalues.front(), 0.0);
    std::size_t usable = 0;
    while (usable < n && eig.eigenvalues[usable] > 1e-10 * top && eig.eigenvalues[usable] > 0.0) ++usable;
    if (usable < k)
        throw EmbeddingRankError("isomap_fit: only " + std::to_string(usable) +
                                     " positive eigenvalues, cannot embed in " + std::to_string(k) + " dimensions",
                                 usable);

    m.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + static_cast<std::ptrdiff_t>(k));
    m.eigenvectors = Matrix(n, k);
    m.embedding = Matrix(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k; ++c) {
            m.eigenvectors(i, c) = eig.eigenvectors(i, c);
            m.embedding(i, c) = eig.eigenvectors(i, c) * std::sqrt(m.eigenvalues[c]);
        }
    return m;
}

/// Geodesic distances from an unseen row to every training point, routed through
/// its n_neighbors nearest training points.
inline std::vector<double> isomap_geodesics_to(const IsomapModel& m, std::span<const double> row) {
    const std::size_t n = m.train.rows();
    std::vector<double> g(n, std::numeric_limits<double>::infinity());
    for (std::size_t nb : nearest_rows(m.train, row, m.n_neighbors)) {
        const double hop = euclidean(row, m.train.row(nb));
        const auto through = m.geodesics.row(nb);
        for (std::size_t t = 0; t < n; ++t) g[t] = std::min(g[t], hop + through[t]);
    }
    return g;
}

/// Landmark-MDS projection: y_c = -1/2 * v_c . (delta - mean_sq) / sqrt(lambda_c).
inline Matrix isomap_transform(const IsomapModel& m, const Matrix& rows) {
    if (rows.cols() != m.input_dims()) throw InvalidInput("isomap_transform: row width does not match the model");
    const std::size_t n = m.train.rows(), k = m.latent_dims();
    Matrix out(rows.rows(), k);
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        const auto g = isomap_geodesics_to(m, rows.row(r));
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += m.eigenvectors(t, c) * (g[t] * g[t] - m.mean_sq[t]);
            out(r, c) = -0.5 * s / std::sqrt(m.eigenvalues[c]);
        }
    }
    return out;
}

}  // namespace gpdr
