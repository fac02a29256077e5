#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "gpdr/dataset.hpp"
#include "gpdr/forest.hpp"
#include "gpdr/gp/multi_tree.hpp"
#include "gpdr/isomap.hpp"
#include "gpdr/neural.hpp"
#include "gpdr/pca.hpp"
#include "gpdr/stats.hpp"

namespace gpdr {

/// A fitted mapping from p standardised features to k latent dimensions.
using DrModel = std::variant<PcaModel, IsomapModel, gp::MultiTree, gp::AutoencoderMultiTree>;

inline Matrix transform(const DrModel& model, const Matrix& rows) {
    return std::visit(
        [&](const auto& m) -> Matrix {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, PcaModel>) return pca_transform(m, rows);
            else if constexpr (std::is_same_v<M, IsomapModel>) return isomap_transform(m, rows);
            else if constexpr (std::is_same_v<M, gp::MultiTree>) return gp::encode(m, rows);
            else return gp::encode(m.encoder, rows);
        },
        model);
}

inline std::size_t latent_dims(const DrModel& model) {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, PcaModel> || std::is_same_v<M, IsomapModel>) return m.latent_dims();
            else return m.k();
        },
        model);
}

struct EvalConfig {
    std::size_t folds = 10;
    RfConfig forest{};
    TrainConfig decoder{};
    std::size_t threads = 1;  // folds evaluated concurrently
};

struct Evaluation {
    double balanced_accuracy = std::numeric_limits<double>::quiet_NaN();  // NaN without labels
    double reconstruction_error = 0.0;
    std::size_t folds = 0;
    std::vector<double> fold_accuracy;
    std::vector<double> fold_reconstruction;
    std::vector<std::string> warnings;
};

/// Fold index per row. With labels, each class is shuffled and dealt round-robin,
/// continuing the dealing position across classes so fold sizes stay even.
inline std::vector<std::size_t> stratified_folds(std::size_t n, const std::vector<int>* labels, std::size_t folds,
                                                 Rng& rng) {
    std::vector<std::vector<std::size_t>> groups;
    if (labels) {
        const int top = labels->empty() ? 0 : *std::max_element(labels->begin(), labels->end());
        groups.resize(static_cast<std::size_t>(top) + 1);
        for (std::size_t i = 0; i < n; ++i) groups[static_cast<std::size_t>((*labels)[i])].push_back(i);
    } else {
        groups.emplace_back(n);
        std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
    }
    std::vector<std::size_t> fold(n, 0);
    std::size_t deal = 0;
    for (auto& g : groups) {
        std::shuffle(g.begin(), g.end(), rng);
        for (std::size_t i : g) fold[i] = deal++ % folds;
    }
    return fold;
}

/// Cross-validated scores of a latent representation: random-forest balanced
/// accuracy against the labels and decoder reconstruction error against the target.
/// The latent is z-scored with each fold's training statistics before the decoder sees it.
inline Evaluation evaluate_latent(const Matrix& latent_rows, const std::optional<std::vector<int>>& labels,
                                  std::size_t class_count, const Matrix& target, const EvalConfig& cfg,
                                  std::uint64_t seed) {
    const std::size_t n = latent_rows.rows();
    if (target.rows() != n || (labels && labels->size() != n))
        throw InvalidInput("evaluate: latent, labels and target must have equal row counts");
    if (cfg.folds < 2) throw InvalidInput("evaluate: need at least 2 folds");
    Evaluation ev;
    ev.folds = cfg.folds;
    if (labels) {
        std::vector<std::size_t> counts(class_count, 0);
        for (int v : *labels) ++counts[static_cast<std::size_t>(v)];
        std::size_t smallest = n;
        for (std::size_t c : counts)
            if (c > 0) smallest = std::min(smallest, c);
        if (smallest < 2) throw InvalidInput("evaluate: a class has fewer than 2 held-out rows");
        if (smallest < ev.folds) {
            ev.warnings.push_back("smallest class has " + std::to_string(smallest) + " rows; using " +
                                  std::to_string(smallest) + " folds instead of " + std::to_string(ev.folds));
            ev.folds = smallest;
        }
    } else if (n < ev.folds) {
        throw InvalidInput("evaluate: fewer rows than folds");
    }

    Rng rng(derive_seed({seed, 0x666f6c64}));
    const auto fold = stratified_folds(n, labels ? &*labels : nullptr, ev.folds, rng);
    ev.fold_accuracy.assign(ev.folds, std::numeric_limits<double>::quiet_NaN());
    ev.fold_reconstruction.assign(ev.folds, 0.0);

    parallel_for(ev.folds, cfg.threads, [&](std::size_t f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
        const Matrix z_train_raw = latent_rows.select_rows(train);
        const Matrix z_test_raw = latent_rows.select_rows(test);

        if (labels) {
            std::vector<int> y_train(train.size()), y_test(test.size());
            for (std::size_t i = 0; i < train.size(); ++i) y_train[i] = (*labels)[train[i]];
            for (std::size_t i = 0; i < test.size(); ++i) y_test[i] = (*labels)[test[i]];
            RfConfig rf = cfg.forest;
            rf.seed = derive_seed({seed, 0x7266, f});
            rf.threads = 1;
            const auto forest = rf_fit(z_train_raw, y_train, class_count, rf);
            const auto pred = rf_predict(forest, z_test_raw);
            // recall over the classes present in this fold
            std::vector<std::size_t> total(class_count, 0), hit(class_count, 0);
            for (std::size_t i = 0; i < test.size(); ++i) {
                ++total[static_cast<std::size_t>(y_test[i])];
                if (pred[i] == y_test[i]) ++hit[static_cast<std::size_t>(y_test[i])];
            }
            double s = 0.0;
            std::size_t present = 0;
            for (std::size_t c = 0; c < class_count; ++c)
                if (total[c] > 0) {
                    s += static_cast<double>(hit[c]) / static_cast<double>(total[c]);
                    ++present;
                }
            ev.fold_accuracy[f] = s / static_cast<double>(present);
        }

        const Standardizer zs = Standardizer::fit(z_train_raw);
        TrainConfig dc = cfg.decoder;
        dc.seed = derive_seed({seed, 0x6463, f});
        const auto decoder = train_decoder(zs.transform(z_train_raw), target.select_rows(train), dc);
        ev.fold_reconstruction[f] = mse_loss(decoder.model, zs.transform(z_test_raw), target.select_rows(test));
    });

    if (labels) ev.balanced_accuracy = mean(ev.fold_accuracy);
    ev.reconstruction_error = mean(ev.fold_reconstruction);
    return ev;
}

/// Maps the held-out rows through the model, then cross-validates on them.
/// `standardized` must already carry the DR-train standardisation.
inline Evaluation evaluate(const DrModel& model, const Dataset& standardized, const SplitPlan& plan,
                           const PcaTarget& target, const EvalConfig& cfg, std::uint64_t seed) {
    const Matrix rows = standardized.features.select_rows(plan.dr_heldout);
    const Matrix latent_rows = transform(model, rows);
    std::optional<std::vector<int>> labels;
    if (standardized.labels) {
        labels.emplace(plan.dr_heldout.size());
        for (std::size_t i = 0; i < plan.dr_heldout.size(); ++i) (*labels)[i] = (*standardized.labels)[plan.dr_heldout[i]];
    }
    return evaluate_latent(latent_rows, labels, standardized.class_count, target.apply(rows), cfg, seed);
}

}  // namespace gpdr
