#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "gpdr/errors.hpp"
#include "gpdr/numerics.hpp"
#include "gpdr/random.hpp"

namespace gpdr {

struct RfConfig {
    std::size_t trees = 100;
    std::size_t max_features = 0;  // 0: floor(sqrt(p)), at least 1
    std::size_t min_samples_split = 2;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

/// Axis-aligned binary tree in a flat node array; node 0 is the root.
struct DecisionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::size_t left = 0, right = 0;
        int label = 0;  // leaf majority class
    };
    std::vector<Node> nodes;

    int predict(std::span<const double> row) const {
        std::size_t i = 0;
        while (nodes[i].feature >= 0) i = row[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].label;
    }
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    std::size_t class_count = 0;
    bool degenerate = false;  // trained on a single class
};

namespace detail {

inline int majority(const std::vector<std::size_t>& counts) {
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // size-weighted child Gini sum
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const int> y, std::size_t classes, const RfConfig& cfg, Rng& rng)
        : x_(x), y_(y), classes_(classes), cfg_(cfg), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> samples) {
        tree_.nodes.clear();
        grow(samples);
        return std::move(tree_);
    }

private:
    std::size_t grow(std::vector<std::size_t>& samples) {
        const std::size_t id = tree_.nodes.size();
        tree_.nodes.emplace_back();
        std::vector<std::size_t> counts(classes_, 0);
        for (std::size_t s : samples) ++counts[static_cast<std::size_t>(y_[s])];
        tree_.nodes[id].label = majority(counts);
        const bool pure = counts[static_cast<std::size_t>(tree_.nodes[id].label)] == samples.size();
        if (pure || samples.size() < cfg_.min_samples_split) return id;

        const SplitChoice best = choose(samples);
        if (best.feature < 0) return id;
        std::vector<std::size_t> left, right;
        for (std::size_t s : samples)
            (x_(s, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(s);
        samples.clear();
        samples.shrink_to_fit();
        const std::size_t l = grow(left);
        const std::size_t r = grow(right);
        tree_.nodes[id].feature = best.feature;
        tree_.nodes[id].threshold = best.threshold;
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    /// Candidate features in random order; once `max_features` have been examined the
    /// search stops if a valid split was found, otherwise it keeps going.
    SplitChoice choose(const std::vector<std::size_t>& samples) {
        const std::size_t p = x_.cols();
        std::size_t m = cfg_.max_features == 0
                            ? std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))))
                            : std::min(cfg_.max_features, p);
        std::vector<std::size_t> features(p);
        std::iota(features.begin(), features.end(), std::size_t{0});
        std::shuffle(features.begin(), features.end(), rng_);

        SplitChoice best;
        std::vector<std::pair<double, int>> column(samples.size());
        std::vector<std::size_t> left(classes_), right(classes_);
        for (std::size_t fi = 0; fi < p; ++fi) {
            if (fi >= m && best.feature >= 0) break;
            const std::size_t f = features[fi];
            for (std::size_t i = 0; i < samples.size(); ++i) column[i] = {x_(samples[i], f), y_[samples[i]]};
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;
            std::fill(left.begin(), left.end(), 0);
            std::fill(right.begin(), right.end(), 0);
            for (const auto& c : column) ++right[static_cast<std::size_t>(c.second)];
            double left_sq = 0.0, right_sq = 0.0;
            for (std::size_t c : right) right_sq += static_cast<double>(c * c);
            const double n = static_cast<double>(column.size());
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                const auto cls = static_cast<std::size_t>(column[i].second);
                left_sq += static_cast<double>(2 * left[cls] + 1);
                right_sq -= static_cast<double>(2 * right[cls] - 1);
                ++left[cls];
                --right[cls];
                if (column[i].first == column[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1), nr = n - nl;
                // nl * gini_l + nr * gini_r
                const double impurity = (nl - left_sq / nl) + (nr - right_sq / nr);
                if (best.feature < 0 || impurity < best.impurity - 1e-12) {
                    best.feature = static_cast<int>(f);
                    best.impurity = impurity;
                    best.threshold = 0.5 * (column[i].first + column[i + 1].first);
                    if (!(best.threshold < column[i + 1].first)) best.threshold = column[i].first;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const int> y_;
    std::size_t classes_;
    const RfConfig& cfg_;
    Rng& rng_;
    DecisionTree tree_;
};

}  // namespace detail

/// Bagged Gini trees grown until pure or below min_samples_split.
inline RandomForest rf_fit(const Matrix& x, std::span<const int> y, std::size_t class_count, const RfConfig& cfg = {}) {
    if (x.rows() != y.size()) throw InvalidInput("rf_fit: label count differs from row count");
    if (x.rows() < 2) throw InvalidInput("rf_fit: need at least 2 rows");
    if (cfg.trees == 0) throw InvalidInput("rf_fit: need at least one tree");
    for (int v : y)
        if (v < 0 || static_cast<std::size_t>(v) >= class_count) throw InvalidInput("rf_fit: label out of range");

    RandomForest rf;
    rf.class_count = class_count;
    rf.degenerate = std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); });
    rf.trees.resize(cfg.trees);
    parallel_for(cfg.trees, cfg.threads, [&](std::size_t t) {
        Rng rng(derive_seed({cfg.seed, t}));
        std::vector<std::size_t> samples(x.rows());
        if (cfg.bootstrap) {
            for (auto& s : samples) s = uniform_index(rng, x.rows());
        } else {
            std::iota(samples.begin(), samples.end(), std::size_t{0});
        }
        detail::TreeBuilder builder(x, y, class_count, cfg, rng);
        rf.trees[t] = builder.build(std::move(samples));
    });
    return rf;
}

/// Majority vote over trees; ties go to the lowest class index.
inline std::vector<int> rf_predict(const RandomForest& rf, const Matrix& rows) {
    std::vector<int> out(rows.rows());
    std::vector<std::size_t> votes(rf.class_count);
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& t : rf.trees) ++votes[static_cast<std::size_t>(t.predict(rows.row(i)))];
        out[i] = detail::majority(votes);
    }
    return out;
}

}  // namespace gpdr
