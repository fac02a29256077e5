#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "gpdr/errors.hpp"
#include "gpdr/numerics.hpp"
#include "gpdr/random.hpp"

namespace gpdr {

/// Symmetric n x n matrix of nonnegative distances with a zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }

    void set(std::size_t i, std::size_t j, double v) noexcept {
        d_[i * n_ + j] = v;
        d_[j * n_ + i] = v;
    }

    std::span<const double> row(std::size_t i) const noexcept { return {d_.data() + i * n_, n_}; }

    /// Sub-matrix over the given points, in the given order.
    DistanceMatrix slice(std::span<const std::size_t> idx) const {
        DistanceMatrix out(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) out.d_[a * idx.size() + b] = (*this)(idx[a], idx[b]);
        return out;
    }

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

inline double euclidean(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return std::sqrt(s);
}

inline DistanceMatrix pairwise_euclidean(const Matrix& x) {
    DistanceMatrix d(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = i + 1; j < x.rows(); ++j) d.set(i, j, euclidean(x.row(i), x.row(j)));
    return d;
}

/// Undirected weighted graph; `adjacency[i]` lists (neighbour, edge length).
struct NeighborGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;

    std::size_t size() const noexcept { return adjacency.size(); }

    void add_edge(std::size_t a, std::size_t b, double w) {
        for (const auto& [v, _] : adjacency[a])
            if (v == b) return;
        adjacency[a].emplace_back(b, w);
        adjacency[b].emplace_back(a, w);
    }
};

/// Indices of the `k` nearest rows of `x` to `query` (ties by index), skipping `exclude`.
inline std::vector<std::size_t> nearest_rows(const Matrix& x, std::span<const double> query, std::size_t k,
                                             std::size_t exclude = std::numeric_limits<std::size_t>::max()) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(x.rows());
    for (std::size_t j = 0; j < x.rows(); ++j)
        if (j != exclude) cand.emplace_back(euclidean(query, x.row(j)), j);
    k = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = cand[i].second;
    return out;
}

namespace detail {

inline std::vector<std::size_t> component_labels(const NeighborGraph& g, std::size_t& count) {
    std::vector<std::size_t> label(g.size(), std::numeric_limits<std::size_t>::max());
    count = 0;
    for (std::size_t s = 0; s < g.size(); ++s) {
        if (label[s] != std::numeric_limits<std::size_t>::max()) continue;
        std::vector<std::size_t> stack{s};
        label[s] = count;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (const auto& [v, _] : g.adjacency[u])
                if (label[v] == std::numeric_limits<std::size_t>::max()) {
                    label[v] = count;
                    stack.push_back(v);
                }
        }
        ++count;
    }
    return label;
}

/// Joins components with the minimum spanning tree of the component graph, whose
/// edge between two components is their closest pair of points (Prim over points).
inline void connect_components(NeighborGraph& g, const Matrix& x) {
    std::size_t count = 0;
    const auto label = component_labels(g, count);
    if (count <= 1) return;
    const std::size_t n = g.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<bool> merged(count, false);
    std::vector<double> best(n, inf);
    std::vector<std::size_t> best_from(n, 0);

    auto absorb = [&](std::size_t comp) {
        merged[comp] = true;
        for (std::size_t u = 0; u < n; ++u) {
            if (label[u] != comp) continue;
            for (std::size_t v = 0; v < n; ++v) {
                if (merged[label[v]]) continue;
                const double d = euclidean(x.row(u), x.row(v));
                if (d < best[v]) {
                    best[v] = d;
                    best_from[v] = u;
                }
            }
        }
    };

    absorb(label[0]);
    for (std::size_t step = 1; step < count; ++step) {
        std::size_t pick = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!merged[label[v]] && (pick == n || best[v] < best[pick])) pick = v;
        g.add_edge(best_from[pick], pick, best[pick]);
        absorb(label[pick]);
    }
}

}  // namespace detail

/// Symmetrised k-nearest-neighbour graph (edge if either point lists the other),
/// made connected by minimum-weight inter-component edges.
inline NeighborGraph knn_graph(const Matrix& x, std::size_t n_neighbors) {
    const std::size_t n = x.rows();
    if (n < n_neighbors + 1)
        throw InvalidInput("knn_graph: need at least n_neighbors + 1 points");
    NeighborGraph g;
    g.adjacency.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : nearest_rows(x, x.row(i), n_neighbors, i)) g.add_edge(i, j, euclidean(x.row(i), x.row(j)));
    detail::connect_components(g, x);
    return g;
}

/// Single-source shortest path lengths (Dijkstra).
inline std::vector<double> shortest_paths_from(const NeighborGraph& g, std::size_t source) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.size(), inf);
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, w] : g.adjacency[u]) {
            const double nd = d + w;
            if (nd < dist[v]) {
                dist[v] = nd;
                queue.emplace(nd, v);
            }
        }
    }
    return dist;
}

inline DistanceMatrix graph_distances(const NeighborGraph& g, std::size_t threads = 1) {
    const std::size_t n = g.size();
    std::vector<std::vector<double>> rows(n);
    parallel_for(n, threads, [&](std::size_t s) { rows[s] = shortest_paths_from(g, s); });
    DistanceMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, std::min(rows[i][j], rows[j][i]));
    return d;
}

/// Geodesic distances: shortest paths over the repaired k-NN graph.
inline DistanceMatrix geodesic(const Matrix& x, std::size_t n_neighbors, std::size_t threads = 1) {
    return graph_distances(knn_graph(x, n_neighbors), threads);
}

}  // namespace gpdr
