#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gpdr/errors.hpp"
#include "gpdr/numerics.hpp"
#include "gpdr/pca.hpp"
#include "gpdr/random.hpp"

namespace gpdr {

struct Dataset {
    Matrix features;                        // n x p
    std::optional<std::vector<int>> labels;  // values in [0, class_count)
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    std::size_t class_count = 0;

    std::size_t n() const noexcept { return features.rows(); }
    std::size_t p() const noexcept { return features.cols(); }
    bool has_labels() const noexcept { return labels.has_value(); }

    Dataset subset(std::span<const std::size_t> rows) const {
        Dataset out;
        out.features = features.select_rows(rows);
        if (labels) {
            std::vector<int> sub(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) sub[i] = (*labels)[rows[i]];
            out.labels = std::move(sub);
        }
        out.feature_names = feature_names;
        out.class_names = class_names;
        out.class_count = class_count;
        return out;
    }
};

/// Which column holds the class label: a header name, or a zero-based index.
struct LabelColumn {
    std::string name_or_index;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

inline std::optional<double> parse_real(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

/// Parse comma-separated data. Columns other than the label whose non-empty cells do
/// not all parse as reals are treated as categorical and dropped. Labels are
/// factorised to 0..c-1 in sorted order of their text.
inline Dataset parse_csv(std::istream& in, const std::optional<LabelColumn>& label_column,
                         bool header) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> names;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (header && names.empty()) {
            names = std::move(cells);
            width = names.size();
            continue;
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw IngestionError("row " + std::to_string(line_no) + ": expected " +
                                 std::to_string(width) + " columns, found " +
                                 std::to_string(cells.size()));
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw IngestionError("no data rows");
    if (!header) {
        for (std::size_t c = 0; c < width; ++c) names.push_back("x" + std::to_string(c));
    }

    std::optional<std::size_t> label_idx;
    if (label_column) {
        const auto& key = label_column->name_or_index;
        const auto it = std::find(names.begin(), names.end(), key);
        if (it != names.end()) {
            label_idx = static_cast<std::size_t>(it - names.begin());
        } else if (auto idx = detail::parse_real(key); idx && *idx >= 0 && *idx == std::floor(*idx)) {
            label_idx = static_cast<std::size_t>(*idx);
        }
        if (!label_idx || *label_idx >= width)
            throw IngestionError("label column '" + key + "' not found");
    }

    std::vector<std::size_t> numeric_cols;
    for (std::size_t c = 0; c < width; ++c) {
        if (label_idx && c == *label_idx) continue;
        bool categorical = false;
        std::optional<std::size_t> missing_row;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& cell = rows[r][c];
            if (cell.empty() || cell == "?" || cell == "NA" || cell == "nan") {
                if (!missing_row) missing_row = r;
                continue;
            }
            if (!detail::parse_real(cell)) {
                categorical = true;
                break;
            }
        }
        if (categorical) continue;
        if (missing_row)
            throw IngestionError("row " + std::to_string(*missing_row + 1 + (header ? 1 : 0)) +
                                 ", column '" + names[c] + "': missing value");
        numeric_cols.push_back(c);
    }
    if (numeric_cols.empty()) throw IngestionError("no numeric feature columns");
    if (rows.size() < 2) throw IngestionError("need at least 2 data rows");

    Dataset d;
    std::vector<double> data;
    data.reserve(rows.size() * numeric_cols.size());
    for (const auto& row : rows)
        for (std::size_t c : numeric_cols) data.push_back(*detail::parse_real(row[c]));
    d.features = Matrix(rows.size(), numeric_cols.size(), std::move(data));
    for (std::size_t c : numeric_cols) d.feature_names.push_back(names[c]);

    if (label_idx) {
        std::map<std::string, int> classes;
        for (const auto& row : rows) classes.emplace(row[*label_idx], 0);
        int next = 0;
        for (auto& [name, id] : classes) {
            id = next++;
            d.class_names.push_back(name);
        }
        std::vector<int> labels;
        labels.reserve(rows.size());
        for (const auto& row : rows) labels.push_back(classes.at(row[*label_idx]));
        d.labels = std::move(labels);
        d.class_count = classes.size();
    }
    return d;
}

inline Dataset load_csv(const std::string& path, const std::optional<LabelColumn>& label_column,
                        bool header = true) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open '" + path + "'");
    return parse_csv(in, label_column, header);
}

/// Per-feature affine map fitted on one split and reusable on unseen rows.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // 0 marks a constant feature

    static Standardizer fit(const Matrix& x) {
        Standardizer s;
        const std::size_t n = x.rows(), p = x.cols();
        s.mean.assign(p, 0.0);
        s.stddev.assign(p, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) s.mean[j] += x(i, j);
        for (double& m : s.mean) m /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                const double d = x(i, j) - s.mean[j];
                s.stddev[j] += d * d;
            }
        for (std::size_t j = 0; j < p; ++j) {
            const double sd = std::sqrt(s.stddev[j] / static_cast<double>(n));
            s.stddev[j] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? sd : 0.0;
        }
        return s;
    }

    Matrix transform(const Matrix& x) const {
        if (x.cols() != mean.size()) throw InvalidInput("Standardizer: column count mismatch");
        Matrix out(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < x.cols(); ++j)
                out(i, j) = stddev[j] == 0.0 ? 0.0 : (x(i, j) - mean[j]) / stddev[j];
        return out;
    }

    Matrix inverse_transform(const Matrix& z) const {
        if (z.cols() != mean.size()) throw InvalidInput("Standardizer: column count mismatch");
        Matrix out(z.rows(), z.cols());
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t j = 0; j < z.cols(); ++j) out(i, j) = z(i, j) * stddev[j] + mean[j];
        return out;
    }
};

/// z-scores every feature with population statistics of `d` itself.
inline std::pair<Dataset, Standardizer> standardize(const Dataset& d) {
    auto s = Standardizer::fit(d.features);
    Dataset out = d;
    out.features = s.transform(d.features);
    return {std::move(out), std::move(s)};
}

struct SplitPlan {
    std::vector<std::size_t> dr_train;
    std::vector<std::size_t> dr_heldout;
    std::uint64_t seed = 0;
};

/// Stratified shuffle split. Each class contributes floor(fraction * size) rows to the
/// DR-train side; the remaining train slots go to the classes with the largest
/// fractional remainders so the total is round(fraction * n).
inline SplitPlan split(const Dataset& d, double dr_fraction, std::uint64_t seed) {
    if (!(dr_fraction > 0.0 && dr_fraction < 1.0))
        throw InvalidInput("split: dr_fraction must lie in (0, 1)");
    const std::size_t n = d.n();
    std::vector<std::vector<std::size_t>> groups;
    if (d.labels) {
        groups.resize(d.class_count);
        for (std::size_t i = 0; i < n; ++i) groups[static_cast<std::size_t>((*d.labels)[i])].push_back(i);
    } else {
        groups.emplace_back(n);
        std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
    }

    Rng rng(seed);
    for (auto& g : groups) std::shuffle(g.begin(), g.end(), rng);

    const auto total_train = static_cast<std::size_t>(std::llround(dr_fraction * static_cast<double>(n)));
    std::vector<std::size_t> take(groups.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double exact = dr_fraction * static_cast<double>(groups[g].size());
        take[g] = static_cast<std::size_t>(std::floor(exact));
        assigned += take[g];
        remainders.emplace_back(exact - std::floor(exact), g);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < total_train && i < remainders.size(); ++i) {
        const auto g = remainders[i].second;
        if (take[g] < groups[g].size()) {
            ++take[g];
            ++assigned;
        }
    }

    SplitPlan plan;
    plan.seed = seed;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        plan.dr_train.insert(plan.dr_train.end(), groups[g].begin(),
                             groups[g].begin() + static_cast<std::ptrdiff_t>(take[g]));
        plan.dr_heldout.insert(plan.dr_heldout.end(),
                               groups[g].begin() + static_cast<std::ptrdiff_t>(take[g]), groups[g].end());
    }
    std::sort(plan.dr_train.begin(), plan.dr_train.end());
    std::sort(plan.dr_heldout.begin(), plan.dr_heldout.end());
    if (plan.dr_train.empty() || plan.dr_heldout.empty())
        throw InvalidInput("split: fraction leaves one side empty");
    return plan;
}

/// The fitness target space: data projected onto the fewest principal components
/// that keep `variance_fraction` of the variance.
struct PcaTarget {
    Matrix transformed;  // n x p'
    std::size_t components_retained = 0;
    double variance_fraction = 0.99;
    PcaModel model;

    Matrix apply(const Matrix& rows) const { return pca_transform(model, rows); }
};

inline PcaTarget pca_target(const Dataset& d, double variance_fraction = 0.99) {
    PcaTarget t;
    t.model = pca_fit_variance(d.features, variance_fraction);
    t.transformed = pca_transform(t.model, d.features);
    t.components_retained = t.model.latent_dims();
    t.variance_fraction = variance_fraction;
    return t;
}

/// Draws a fresh set of distinct row indices every call.
class BatchSampler {
public:
    BatchSampler(std::size_t batch_size, std::uint64_t seed) : batch_size_(batch_size), rng_(seed) {
        if (batch_size == 0) throw InvalidInput("BatchSampler: batch size must be positive");
    }

    std::vector<std::size_t> next(std::size_t source_size) {
        if (source_size == 0) throw InvalidInput("BatchSampler: empty source");
        ++generation_;
        std::vector<std::size_t> all(source_size);
        std::iota(all.begin(), all.end(), std::size_t{0});
        if (batch_size_ >= source_size) return all;
        std::vector<std::size_t> out;
        out.reserve(batch_size_);
        std::sample(all.begin(), all.end(), std::back_inserter(out), batch_size_, rng_);
        return out;
    }

    std::size_t batch_size() const noexcept { return batch_size_; }
    std::size_t generation() const noexcept { return generation_; }

private:
    std::size_t batch_size_;
    Rng rng_;
    std::size_t generation_ = 0;
};

}  // namespace gpdr
