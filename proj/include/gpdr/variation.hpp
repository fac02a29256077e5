#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "gpdr/gp/generate.hpp"
#include "gpdr/gp/multi_tree.hpp"
#include "gpdr/random.hpp"

namespace gpdr {

struct VariationConfig {
    double crossover_rate = 0.8;            // p_c, per tree index
    double subtree_mutation_rate = 0.2;     // p_s, per tree
    double one_point_mutation_rate = 0.2;   // p_o, per tree
    std::size_t tournament_size = 7;
    std::size_t elitism = 1;
    int max_depth = gp::kMaxDepth;
    gp::PrimitiveSet primitives{};

    void validate(std::size_t population) const {
        auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
        if (!rate_ok(crossover_rate) || !rate_ok(subtree_mutation_rate) || !rate_ok(one_point_mutation_rate))
            throw InvalidInput("VariationConfig: rates must lie in [0, 1]");
        if (tournament_size < 1) throw InvalidInput("VariationConfig: tournament size must be >= 1");
        if (elitism >= population) throw InvalidInput("VariationConfig: elitism must be < population size");
    }
};

/// Counters filled in by the operators when a caller asks for them.
struct VariationStats {
    std::size_t crossover_opportunities = 0;
    std::size_t crossover_attempts = 0;
    std::size_t crossover_rejections = 0;
    std::size_t subtree_mutations = 0;
    std::size_t one_point_mutations = 0;
};

/// Minimum-fitness member among `tournament_size` uniform draws with replacement;
/// ties go to the lowest index.
inline std::size_t tournament_select(std::span<const double> fitness, std::size_t tournament_size, Rng& rng) {
    if (fitness.empty()) throw InvalidInput("tournament_select: empty population");
    std::size_t best = uniform_index(rng, fitness.size());
    for (std::size_t t = 1; t < tournament_size; ++t) {
        const std::size_t c = uniform_index(rng, fitness.size());
        if (fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best)) best = c;
    }
    return best;
}

namespace detail {

inline std::pair<gp::Tree, gp::Tree> swap_subtrees(const gp::Tree& a, const gp::Tree& b, int max_depth,
                                                   Rng& rng, VariationStats* stats) {
    const std::size_t pa = uniform_index(rng, a.size());
    const std::size_t pb = uniform_index(rng, b.size());
    gp::Tree ca = a.with_subtree(pa, b.subtree(pb));
    gp::Tree cb = b.with_subtree(pb, a.subtree(pa));
    if (ca.depth() > max_depth || cb.depth() > max_depth) {
        if (stats) ++stats->crossover_rejections;
        return {a, b};
    }
    return {std::move(ca), std::move(cb)};
}

inline gp::Tree mutate_subtree(const gp::Tree& t, int max_depth, const gp::PrimitiveSet& ps, Rng& rng) {
    const std::size_t pos = uniform_index(rng, t.size());
    const int node_depth = t.node_depths()[pos];
    const int budget = std::max(0, max_depth - node_depth);
    const gp::Tree fresh = gp::generate_grow(0, budget, t.input_arity(), ps, rng);
    return t.with_subtree(pos, fresh.nodes());
}

inline gp::Tree mutate_point(const gp::Tree& t, const gp::PrimitiveSet& ps, Rng& rng) {
    const std::size_t pos = uniform_index(rng, t.size());
    std::vector<gp::Node> nodes = t.nodes();
    gp::Node& n = nodes[pos];
    if (gp::is_terminal(n.op)) {
        n = gp::random_terminal(t.input_arity(), ps, rng);
    } else {
        std::vector<gp::Op> same;
        for (gp::Op op : gp::operators(ps.functions))
            if (op != n.op && gp::arity(op) == gp::arity(n.op)) same.push_back(op);
        if (!same.empty()) n = gp::Node::function(same[uniform_index(rng, same.size())]);
    }
    return gp::Tree(std::move(nodes), t.input_arity());
}

}  // namespace detail

/// Independently for each tree index j, with probability p_c, swaps uniformly chosen
/// subtrees between a's and b's tree j. A swap producing a tree deeper than the
/// limit is discarded and the parents' trees are kept at that index.
template <class G>
std::pair<G, G> same_index_crossover(const G& a, const G& b, double p_c, Rng& rng,
                                     int max_depth = gp::kMaxDepth, VariationStats* stats = nullptr) {
    G ca = a, cb = b;
    auto la = gp::tree_lists(ca);
    auto lb = gp::tree_lists(cb);
    for (std::size_t l = 0; l < la.size(); ++l) {
        auto& ta = *la[l];
        auto& tb = *lb[l];
        if (ta.size() != tb.size()) throw InvalidInput("same_index_crossover: tree counts differ");
        for (std::size_t j = 0; j < ta.size(); ++j) {
            if (stats) ++stats->crossover_opportunities;
            if (!bernoulli(rng, p_c)) continue;
            if (stats) ++stats->crossover_attempts;
            auto [x, y] = detail::swap_subtrees(ta[j], tb[j], max_depth, rng, stats);
            ta[j] = std::move(x);
            tb[j] = std::move(y);
        }
    }
    return {std::move(ca), std::move(cb)};
}

/// Each tree, with probability p_s, has a uniformly chosen subtree replaced by a grown
/// one whose depth keeps the tree within the limit.
template <class G>
G subtree_mutation(const G& g, double p_s, Rng& rng, const gp::PrimitiveSet& ps = {},
                   int max_depth = gp::kMaxDepth, VariationStats* stats = nullptr) {
    G out = g;
    for (auto* list : gp::tree_lists(out))
        for (auto& t : *list) {
            if (!bernoulli(rng, p_s)) continue;
            if (stats) ++stats->subtree_mutations;
            t = detail::mutate_subtree(t, max_depth, ps, rng);
        }
    return out;
}

/// Each tree, with probability p_o, has one node's symbol replaced by another of the
/// same arity; the shape of the tree never changes.
template <class G>
G one_point_mutation(const G& g, double p_o, Rng& rng, const gp::PrimitiveSet& ps = {},
                     VariationStats* stats = nullptr) {
    G out = g;
    for (auto* list : gp::tree_lists(out))
        for (auto& t : *list) {
            if (!bernoulli(rng, p_o)) continue;
            if (stats) ++stats->one_point_mutations;
            t = detail::mutate_point(t, ps, rng);
        }
    return out;
}

/// Elites first (lowest fitness, ties by index), then offspring from tournament
/// parents through crossover, subtree mutation and one-point mutation in that order.
template <class G>
std::vector<G> next_generation(const std::vector<G>& pop, std::span<const double> fitness,
                               const VariationConfig& cfg, Rng& rng, VariationStats* stats = nullptr) {
    if (pop.size() < 2) throw InvalidInput("next_generation: population must have at least 2 genomes");
    if (fitness.size() != pop.size()) throw InvalidInput("next_generation: fitness count mismatch");
    cfg.validate(pop.size());

    std::vector<G> next;
    next.reserve(pop.size());
    if (cfg.elitism > 0) {
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
        for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);
    }
    while (next.size() < pop.size()) {
        const auto& pa = pop[tournament_select(fitness, cfg.tournament_size, rng)];
        const auto& pb = pop[tournament_select(fitness, cfg.tournament_size, rng)];
        auto [ca, cb] = same_index_crossover(pa, pb, cfg.crossover_rate, rng, cfg.max_depth, stats);
        for (G* child : {&ca, &cb}) {
            if (next.size() == pop.size()) break;
            G m = subtree_mutation(*child, cfg.subtree_mutation_rate, rng, cfg.primitives, cfg.max_depth, stats);
            next.push_back(one_point_mutation(m, cfg.one_point_mutation_rate, rng, cfg.primitives, stats));
        }
    }
    return next;
}

}  // namespace gpdr
