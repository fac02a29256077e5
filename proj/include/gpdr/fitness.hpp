#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpdr/distances.hpp"
#include "gpdr/errors.hpp"
#include "gpdr/gp/multi_tree.hpp"
#include "gpdr/numerics.hpp"

namespace gpdr {

inline constexpr double kSammonMinDistance = 1e-12;

/// Sum over i<j of (d - d~)^2 / d, divided by the sum of d. Pairs with d below
/// 1e-12 are left out of both sums.
inline double sammon_stress(const DistanceMatrix& d, const DistanceMatrix& dt) {
    if (d.size() != dt.size()) throw InvalidInput("sammon_stress: matrix sizes differ");
    double norm = 0.0, stress = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = i + 1; j < d.size(); ++j) {
            const double dij = d(i, j);
            if (dij < kSammonMinDistance) continue;
            const double diff = dij - dt(i, j);
            norm += dij;
            stress += diff * diff / dij;
        }
    }
    if (norm == 0.0) throw DegenerateTarget("sammon_stress: target distances are all zero");
    return stress / norm;
}

/// Per-element pair counts for one row. concordant[j] counts partners l with
/// (d_l - d_j)(d~_l - d~_j) > 0, discordant[j] those with < 0; ties in either
/// vector count as neither.
struct RankStats {
    std::vector<std::size_t> concordant;
    std::vector<std::size_t> discordant;

    std::size_t size() const noexcept { return concordant.size(); }
    std::size_t total_pairs() const noexcept { return size() * (size() - 1) / 2; }
    std::size_t concordant_pairs() const { return std::accumulate(concordant.begin(), concordant.end(), std::size_t{0}) / 2; }
    std::size_t discordant_pairs() const { return std::accumulate(discordant.begin(), discordant.end(), std::size_t{0}) / 2; }
};

namespace detail {

/// Counting tree over positions [0, n), reusable across rows.
class Fenwick {
public:
    void reset(std::size_t n) { t_.assign(n + 1, 0); }
    void add(std::size_t i) {
        for (++i; i < t_.size(); i += i & (~i + 1)) ++t_[i];
    }
    // count of inserted positions < i
    std::size_t prefix(std::size_t i) const {
        std::size_t s = 0;
        for (; i > 0; i -= i & (~i + 1)) s += t_[i];
        return s;
    }

private:
    std::vector<std::size_t> t_;
};

/// Buffers for one row at a time; `order` holds indices by ascending d (ties in
/// index order) and `stats` the per-element counts after kendall_into.
struct KendallWorkspace {
    std::vector<std::pair<double, std::size_t>> pairs;
    std::vector<std::size_t> order;
    std::vector<std::size_t> ranks;
    std::vector<std::size_t> rank_counts;
    std::vector<std::size_t> group;
    Fenwick tree;
    RankStats stats;
};

/// Indices sorted by ascending value, equal values in index order.
inline void stable_order_into(std::span<const double> v, std::vector<std::pair<double, std::size_t>>& pairs,
                              std::vector<std::size_t>& order) {
    pairs.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) pairs[i] = {v[i], i};
    std::sort(pairs.begin(), pairs.end());
    order.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) order[i] = pairs[i].second;
}

inline std::vector<std::size_t> stable_order(std::span<const double> v) {
    std::vector<std::pair<double, std::size_t>> pairs;
    std::vector<std::size_t> order;
    stable_order_into(v, pairs, order);
    return order;
}

/// Dense ranks of `v` (equal values share a rank); returns the number of distinct values.
inline std::size_t dense_ranks_into(std::span<const double> v, std::vector<std::pair<double, std::size_t>>& pairs,
                                    std::vector<std::size_t>& ranks) {
    pairs.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) pairs[i] = {v[i], i};
    std::sort(pairs.begin(), pairs.end());
    ranks.resize(v.size());
    std::size_t r = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i > 0 && pairs[i].first != pairs[i - 1].first) ++r;
        ranks[pairs[i].second] = r;
    }
    return v.empty() ? 0 : r + 1;
}

inline void check_rows(std::span<const double> d, std::span<const double> dt) {
    if (d.size() != dt.size()) throw InvalidInput("kendall: row lengths differ");
    if (d.size() < 2) throw InvalidInput("kendall: rows need at least 2 entries");
}

/// O(N log N): one sweep by ascending d in equal-value groups. A Fenwick tree over
/// the ranks of d~ counts smaller-d partners; larger-d partners follow from the
/// overall rank counts minus the smaller- and equal-d ones.
/// `d_order`, when given, is the precomputed stable ascending order of d.
inline std::span<const std::size_t> kendall_into(std::span<const double> d, std::span<const double> dt,
                                                 KendallWorkspace& ws, std::span<const std::size_t> d_order = {}) {
    check_rows(d, dt);
    const std::size_t n = d.size();
    const std::size_t distinct = dense_ranks_into(dt, ws.pairs, ws.ranks);
    if (d_order.empty()) {
        stable_order_into(d, ws.pairs, ws.order);
        d_order = ws.order;
    }
    auto& s = ws.stats;
    s.concordant.assign(n, 0);
    s.discordant.assign(n, 0);
    const auto order = d_order;
    const auto& rt = ws.ranks;

    // below[r]: elements with d~ rank < r
    std::vector<std::size_t>& below = ws.rank_counts;
    below.assign(distinct + 1, 0);
    for (std::size_t r : rt) ++below[r + 1];
    for (std::size_t r = 1; r <= distinct; ++r) below[r] += below[r - 1];

    ws.tree.reset(distinct);
    std::size_t inserted = 0;
    std::size_t g = 0;
    while (g < n) {
        std::size_t e = g;
        while (e < n && d[order[e]] == d[order[g]]) ++e;
        if (e - g > 1) {
            ws.group.resize(e - g);
            for (std::size_t k = g; k < e; ++k) ws.group[k - g] = rt[order[k]];
            std::sort(ws.group.begin(), ws.group.end());
        }
        for (std::size_t k = g; k < e; ++k) {
            const std::size_t j = order[k];
            const std::size_t r = rt[j];
            const std::size_t lo = ws.tree.prefix(r);
            const std::size_t hi = inserted - ws.tree.prefix(r + 1);
            std::size_t eq_lo = 0, eq_hi = 0;
            if (e - g > 1) {
                eq_lo = static_cast<std::size_t>(std::lower_bound(ws.group.begin(), ws.group.end(), r) - ws.group.begin());
                eq_hi = static_cast<std::size_t>(ws.group.end() - std::upper_bound(ws.group.begin(), ws.group.end(), r));
            }
            const std::size_t all_lo = below[r];
            const std::size_t all_hi = n - below[r + 1];
            s.concordant[j] = lo + (all_hi - hi - eq_hi);
            s.discordant[j] = hi + (all_lo - lo - eq_lo);
        }
        for (std::size_t k = g; k < e; ++k) ws.tree.add(rt[order[k]]);
        inserted += e - g;
        g = e;
    }
    return order;
}

}  // namespace detail

inline RankStats kendall_rank_stats(std::span<const double> d, std::span<const double> dt) {
    detail::KendallWorkspace ws;
    detail::kendall_into(d, dt, ws);
    return std::move(ws.stats);
}

/// tau-a: (n_c - n_d) / (N(N-1)/2).
inline double kendall_tau_row(std::span<const double> d, std::span<const double> dt) {
    const auto s = kendall_rank_stats(d, dt);
    const double nc = static_cast<double>(s.concordant_pairs());
    const double nd = static_cast<double>(s.discordant_pairs());
    return (nc - nd) / static_cast<double>(s.total_pairs());
}

enum class WeightScheme { Hyperbolic, Uniform };

/// Weight of the element at ascending-d rank r (0 = shortest distance).
inline double rank_weight(WeightScheme scheme, std::size_t r) noexcept {
    return scheme == WeightScheme::Hyperbolic ? 1.0 / (static_cast<double>(r) + 1.0) : 1.0;
}

/// Pair (j,l) carries weight w_j + w_l, so the weighted sum of signs collapses to
/// sum_j w_j (C_j - D_j) and the total weight to (N-1) sum_j w_j.
namespace detail {

inline double weighted_kendall_into(std::span<const double> d, std::span<const double> dt, WeightScheme scheme,
                                    KendallWorkspace& ws, std::span<const std::size_t> d_order = {}) {
    const auto order = kendall_into(d, dt, ws, d_order);
    double num = 0.0, wsum = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t j = order[r];
        const double w = rank_weight(scheme, r);
        num += w * (static_cast<double>(ws.stats.concordant[j]) - static_cast<double>(ws.stats.discordant[j]));
        wsum += w;
    }
    return num / (static_cast<double>(d.size() - 1) * wsum);
}

}  // namespace detail

inline double weighted_kendall_tau_row(std::span<const double> d, std::span<const double> dt,
                                       WeightScheme scheme = WeightScheme::Hyperbolic) {
    detail::KendallWorkspace ws;
    return detail::weighted_kendall_into(d, dt, scheme, ws);
}

/// Negative mean over points of the weighted tau between their distance rows
/// (self-distance removed).
/// Per point, the stable ascending order of its distance row with the self-distance
/// removed; rank_fitness accepts it to skip re-sorting a fixed d.
inline std::vector<std::vector<std::size_t>> row_orders(const DistanceMatrix& d) {
    const std::size_t n = d.size();
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<double> a(n > 0 ? n - 1 : 0);
    std::vector<std::pair<double, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ri = d.row(i);
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) a[m++] = ri[j];
        detail::stable_order_into(a, pairs, out[i]);
    }
    return out;
}

inline double rank_fitness(const DistanceMatrix& d, const DistanceMatrix& dt,
                           WeightScheme scheme = WeightScheme::Hyperbolic,
                           const std::vector<std::vector<std::size_t>>* d_orders = nullptr) {
    if (d.size() != dt.size()) throw InvalidInput("rank_fitness: matrix sizes differ");
    if (d_orders && d_orders->size() != d.size()) throw InvalidInput("rank_fitness: row orders do not match");
    const std::size_t n = d.size();
    if (n < 3) throw InvalidInput("rank_fitness: need at least 3 points");
    std::vector<double> a(n - 1), b(n - 1);
    detail::KendallWorkspace ws;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ri = d.row(i);
        const auto rti = dt.row(i);
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            a[m] = ri[j];
            b[m] = rti[j];
            ++m;
        }
        total += detail::weighted_kendall_into(a, b, scheme, ws,
                                               d_orders ? std::span<const std::size_t>((*d_orders)[i])
                                                        : std::span<const std::size_t>());
    }
    return -total / static_cast<double>(n);
}

inline double mean_squared_error(const Matrix& a, const Matrix& b, const char* who = "mean_squared_error") {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidInput(std::string(who) + ": shapes differ (" + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                           std::to_string(b.cols()) + ")");
    if (a.empty()) throw InvalidInput(std::string(who) + ": empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double diff = a(i, j) - b(i, j);
            s += diff * diff;
        }
    return s / static_cast<double>(a.rows() * a.cols());
}

inline double teacher_fitness(const Matrix& teacher_latent, const Matrix& latent) {
    return mean_squared_error(teacher_latent, latent, "teacher_fitness");
}

inline double gp_autoencoder_fitness(const Matrix& target, const Matrix& reconstruction) {
    return mean_squared_error(target, reconstruction, "gp_autoencoder_fitness");
}

enum class Objective { Dist, Rank, Teacher, GpAutoencoder };
enum class Metric { Euclidean, Geodesic };

struct FitnessSpec {
    Objective objective = Objective::Dist;
    Metric metric = Metric::Euclidean;  // dist and rank only
    WeightScheme weights = WeightScheme::Hyperbolic;
    std::size_t n_neighbors = 10;

    bool uses_distances() const noexcept { return objective == Objective::Dist || objective == Objective::Rank; }
    bool uses_teacher() const noexcept { return objective == Objective::Teacher; }
    bool needs_autoencoder() const noexcept { return objective == Objective::GpAutoencoder; }
};

/// Everything the objectives compare against, over the whole DR-train split.
/// Inputs are the standardised features fed to the genome; the target is the
/// PCA-space projection of the same rows.
struct FitnessProblem {
    FitnessSpec spec;
    Matrix inputs;
    Matrix target;
    std::optional<DistanceMatrix> target_distances;
    std::optional<Matrix> teacher_latent;

    std::size_t size() const noexcept { return inputs.rows(); }

    static FitnessProblem make(const FitnessSpec& spec, Matrix inputs, Matrix target,
                               std::optional<Matrix> teacher_latent = std::nullopt) {
        if (inputs.rows() != target.rows()) throw InvalidInput("FitnessProblem: input and target row counts differ");
        if (spec.uses_teacher() != teacher_latent.has_value())
            throw InvalidInput("FitnessProblem: teacher latent is required by, and only by, the teacher objective");
        if (teacher_latent && teacher_latent->rows() != inputs.rows())
            throw InvalidInput("FitnessProblem: teacher latent row count differs");
        FitnessProblem p{spec, std::move(inputs), std::move(target), std::nullopt, std::move(teacher_latent)};
        if (spec.uses_distances())
            p.target_distances = spec.metric == Metric::Euclidean ? pairwise_euclidean(p.target)
                                                                  : geodesic(p.target, spec.n_neighbors);
        return p;
    }
};

/// The rows of a FitnessProblem one generation is scored on.
struct BatchView {
    const FitnessProblem* problem = nullptr;
    std::vector<std::size_t> rows;
    Matrix inputs;
    Matrix target;
    DistanceMatrix distances;  // empty unless the objective uses distances
    std::vector<std::vector<std::size_t>> distance_orders;  // rank objective only
    Matrix teacher;            // empty unless the objective uses a teacher

    std::size_t size() const noexcept { return rows.size(); }
};

inline BatchView make_batch(const FitnessProblem& p, std::vector<std::size_t> rows) {
    BatchView b;
    b.problem = &p;
    b.rows = std::move(rows);
    b.inputs = p.inputs.select_rows(b.rows);
    b.target = p.target.select_rows(b.rows);
    if (p.target_distances) b.distances = p.target_distances->slice(b.rows);
    if (p.spec.objective == Objective::Rank) b.distance_orders = row_orders(b.distances);
    if (p.teacher_latent) b.teacher = p.teacher_latent->select_rows(b.rows);
    return b;
}

inline BatchView full_batch(const FitnessProblem& p) {
    std::vector<std::size_t> rows(p.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return make_batch(p, std::move(rows));
}

inline constexpr double kWorstFitness = std::numeric_limits<double>::infinity();

namespace detail {

inline double finite_or_worst(double f) { return std::isfinite(f) ? f : kWorstFitness; }

}  // namespace detail

/// Objective value of a multi-tree genome on a batch; lower is better.
inline double score(const gp::MultiTree& g, const BatchView& batch) {
    const FitnessSpec& spec = batch.problem->spec;
    if (spec.needs_autoencoder())
        throw InvalidInput("score: the GP-autoencoder objective requires an autoencoder genome");
    const Matrix latent = gp::encode(g, batch.inputs);
    switch (spec.objective) {
        case Objective::Dist:
            return detail::finite_or_worst(sammon_stress(batch.distances, pairwise_euclidean(latent)));
        case Objective::Rank:
            return detail::finite_or_worst(rank_fitness(batch.distances, pairwise_euclidean(latent), spec.weights,
                                                                 &batch.distance_orders));
        case Objective::Teacher:
            return detail::finite_or_worst(teacher_fitness(batch.teacher, latent));
        case Objective::GpAutoencoder: break;
    }
    return kWorstFitness;
}

inline double score(const gp::AutoencoderMultiTree& g, const BatchView& batch) {
    if (!batch.problem->spec.needs_autoencoder())
        throw InvalidInput("score: autoencoder genomes are scored only by the GP-autoencoder objective");
    if (g.output_dims() != batch.target.cols())
        throw InvalidInput("score: decoder width does not match the target dimension");
    const auto out = gp::autoencode(g, batch.inputs);
    return detail::finite_or_worst(gp_autoencoder_fitness(batch.target, out.reconstruction));
}

}  // namespace gpdr
