#pragma once

#include <cstddef>
#include <vector>

#include "gpdr/gp/multi_tree.hpp"
#include "gpdr/random.hpp"

namespace gpdr::gp {

/// Knobs shared by initialisation and mutation.
struct PrimitiveSet {
    FunctionSet functions = FunctionSet::Polynomial;
    double variable_probability = 0.9;      // terminal is a variable (else an N(0,1) constant)
    double grow_terminal_probability = 0.5;  // grow: stop at a node once min depth is reached
};

inline Node random_terminal(std::size_t input_arity, const PrimitiveSet& ps, Rng& rng) {
    if (input_arity > 0 && bernoulli(rng, ps.variable_probability))
        return Node::variable(static_cast<std::uint32_t>(uniform_index(rng, input_arity)));
    return Node::constant(standard_normal(rng));
}

inline Node random_function(const PrimitiveSet& ps, Rng& rng) {
    const auto ops = operators(ps.functions);
    return Node::function(ops[uniform_index(rng, ops.size())]);
}

namespace detail {

inline void grow_into(std::vector<Node>& out, int depth, int min_depth, int max_depth, bool full,
                      std::size_t input_arity, const PrimitiveSet& ps, Rng& rng) {
    bool terminal = depth >= max_depth;
    if (!terminal && !full && depth >= min_depth) terminal = bernoulli(rng, ps.grow_terminal_probability);
    if (terminal) {
        out.push_back(random_terminal(input_arity, ps, rng));
        return;
    }
    const Node f = random_function(ps, rng);
    out.push_back(f);
    for (int c = 0; c < arity(f.op); ++c)
        grow_into(out, depth + 1, min_depth, max_depth, full, input_arity, ps, rng);
}

}  // namespace detail

/// Every leaf at exactly `depth`.
inline Tree generate_full(int depth, std::size_t input_arity, const PrimitiveSet& ps, Rng& rng) {
    std::vector<Node> nodes;
    detail::grow_into(nodes, 0, depth, depth, true, input_arity, ps, rng);
    return Tree(std::move(nodes), input_arity);
}

/// Leaves anywhere in [min_depth, max_depth].
inline Tree generate_grow(int min_depth, int max_depth, std::size_t input_arity, const PrimitiveSet& ps,
                          Rng& rng) {
    std::vector<Node> nodes;
    detail::grow_into(nodes, 0, min_depth, max_depth, false, input_arity, ps, rng);
    return Tree(std::move(nodes), input_arity);
}

namespace detail {

struct RampSlot {
    int depth;
    bool full;
};

/// Genome i gets depth min + (i mod buckets); within each depth bucket genomes
/// alternate between full and grow.
inline RampSlot ramp_slot(std::size_t i, int depth_min, int depth_max) {
    const auto buckets = static_cast<std::size_t>(depth_max - depth_min + 1);
    return {depth_min + static_cast<int>(i % buckets), (i / buckets) % 2 == 0};
}

inline Tree ramp_tree(const RampSlot& s, int depth_min, std::size_t input_arity, const PrimitiveSet& ps,
                      Rng& rng) {
    return s.full ? generate_full(s.depth, input_arity, ps, rng)
                  : generate_grow(depth_min, s.depth, input_arity, ps, rng);
}

inline void check_ramp(std::size_t count, int depth_min, int depth_max) {
    if (count == 0) throw InvalidInput("ramped_half_and_half: count must be positive");
    if (depth_min < 0 || depth_min > depth_max)
        throw InvalidInput("ramped_half_and_half: need 0 <= depth_min <= depth_max");
}

}  // namespace detail

inline std::vector<MultiTree> ramped_half_and_half(std::size_t count, std::size_t input_arity,
                                                   std::size_t k_trees, int depth_min, int depth_max,
                                                   const PrimitiveSet& ps, Rng& rng) {
    detail::check_ramp(count, depth_min, depth_max);
    std::vector<MultiTree> pop(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto slot = detail::ramp_slot(i, depth_min, depth_max);
        for (std::size_t j = 0; j < k_trees; ++j)
            pop[i].trees.push_back(detail::ramp_tree(slot, depth_min, input_arity, ps, rng));
    }
    return pop;
}

inline std::vector<AutoencoderMultiTree> ramped_half_and_half_autoencoder(
    std::size_t count, std::size_t input_arity, std::size_t k, std::size_t output_dims, int depth_min,
    int depth_max, const PrimitiveSet& ps, Rng& rng) {
    detail::check_ramp(count, depth_min, depth_max);
    std::vector<AutoencoderMultiTree> pop(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto slot = detail::ramp_slot(i, depth_min, depth_max);
        for (std::size_t j = 0; j < k; ++j)
            pop[i].encoder.trees.push_back(detail::ramp_tree(slot, depth_min, input_arity, ps, rng));
        for (std::size_t j = 0; j < output_dims; ++j)
            pop[i].decoder.trees.push_back(detail::ramp_tree(slot, depth_min, k, ps, rng));
    }
    return pop;
}

}  // namespace gpdr::gp
