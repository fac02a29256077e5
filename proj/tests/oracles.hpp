// Brute-force reference implementations used as test oracles. Each one is written
// independently of the library code it checks and favours clarity over speed.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "gpdr/gp/tree.hpp"
#include "gpdr/numerics.hpp"

namespace oracle {

inline gpdr::Matrix matmul(const gpdr::Matrix& a, const gpdr::Matrix& b) {
    gpdr::Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

inline int sign(double v) { return (v > 0) - (v < 0); }

/// tau-a over every unordered pair.
inline double kendall_tau(const std::vector<double>& d, const std::vector<double>& dt) {
    const std::size_t n = d.size();
    long long s = 0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = j + 1; l < n; ++l) s += sign(d[l] - d[j]) * sign(dt[l] - dt[j]);
    return static_cast<double>(s) / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

/// Rank of j in ascending d, earlier index first among equal values.
inline std::size_t ascending_rank(const std::vector<double>& d, std::size_t j) {
    std::size_t r = 0;
    for (std::size_t l = 0; l < d.size(); ++l)
        if (d[l] < d[j] || (d[l] == d[j] && l < j)) ++r;
    return r;
}

/// Every pair weighted by w(r_j) + w(r_l).
inline double weighted_kendall_tau(const std::vector<double>& d, const std::vector<double>& dt, bool hyperbolic = true) {
    const std::size_t n = d.size();
    auto w = [&](std::size_t j) { return hyperbolic ? 1.0 / (static_cast<double>(ascending_rank(d, j)) + 1.0) : 1.0; };
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = j + 1; l < n; ++l) {
            const double pw = w(j) + w(l);
            num += pw * sign(d[l] - d[j]) * sign(dt[l] - dt[j]);
            den += pw;
        }
    return num / den;
}

/// Sammon stress summed over ordered pairs i != j, then halved on both sums.
inline double sammon(const std::vector<std::vector<double>>& d, const std::vector<std::vector<double>>& dt) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (i == j || d[i][j] < 1e-12) continue;
            num += (d[i][j] - dt[i][j]) * (d[i][j] - dt[i][j]) / d[i][j];
            den += d[i][j];
        }
    return (num / 2.0) / (den / 2.0);
}

/// Floyd-Warshall on a dense adjacency (inf = no edge).
inline std::vector<std::vector<double>> all_pairs_shortest(std::vector<std::vector<double>> w) {
    const std::size_t n = w.size();
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) w[i][j] = std::min(w[i][j], w[i][k] + w[k][j]);
    return w;
}

/// Recursive evaluation of a prefix-order tree.
inline double eval(const std::vector<gpdr::gp::Node>& nodes, std::size_t& pos, const std::vector<double>& x) {
    using gpdr::gp::Op;
    const auto n = nodes[pos++];
    auto clamp = [](double v) {
        if (std::isnan(v)) return 0.0;
        return std::clamp(v, -1e12, 1e12);
    };
    switch (n.op) {
        case Op::Variable: return x[n.var];
        case Op::Constant: return n.value;
        case Op::Cos: return clamp(std::cos(eval(nodes, pos, x)));
        case Op::Plog: return clamp(std::log(std::abs(eval(nodes, pos, x)) + 1e-6));
        default: break;
    }
    const double a = eval(nodes, pos, x);
    const double b = eval(nodes, pos, x);
    switch (n.op) {
        case Op::Add: return clamp(a + b);
        case Op::Sub: return clamp(a - b);
        default: return clamp(a * b);
    }
}

inline int depth(const std::vector<gpdr::gp::Node>& nodes, std::size_t& pos) {
    const auto n = nodes[pos++];
    int d = 0;
    for (int c = 0; c < gpdr::gp::arity(n.op); ++c) d = std::max(d, 1 + depth(nodes, pos));
    return d;
}

/// Covariance eigenvalues (population, descending) via Eigen.
inline std::vector<double> covariance_eigenvalues(const gpdr::Matrix& x) {
    Eigen::MatrixXd m(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) m(i, j) = x(i, j);
    const Eigen::MatrixXd c = m.rowwise() - m.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(x.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.rbegin(), v.rend());
    return v;
}

/// Exact two-sided permutation p-value of the rank-sum statistic for tie-free
/// samples of sizes n1, n2: P(|U - mu| >= |u - mu|) over all C(n1+n2, n1) labelings.
inline double mann_whitney_exact_p(std::size_t n1, std::size_t n2, double u) {
    const std::size_t n = n1 + n2;
    std::map<long long, long long> counts;  // U -> number of labelings
    long long total = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
        long long rank_sum = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) rank_sum += static_cast<long long>(i + 1);
        ++counts[rank_sum - static_cast<long long>(n1 * (n1 + 1) / 2)];
        ++total;
    }
    const double mu = static_cast<double>(n1 * n2) / 2.0;
    long long extreme = 0;
    for (const auto& [uu, c] : counts)
        if (std::abs(static_cast<double>(uu) - mu) >= std::abs(u - mu) - 1e-9) extreme += c;
    return static_cast<double>(extreme) / static_cast<double>(total);
}

inline gpdr::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> nd(0.0, sd);
    gpdr::Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = nd(rng);
    return m;
}

}  // namespace oracle
