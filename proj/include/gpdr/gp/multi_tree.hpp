#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "gpdr/gp/tree.hpp"

namespace gpdr::gp {

/// k trees over the same p inputs; tree j produces latent dimension j.
struct MultiTree {
    std::vector<Tree> trees;

    std::size_t k() const noexcept { return trees.size(); }
    std::size_t input_arity() const noexcept { return trees.empty() ? 0 : trees.front().input_arity(); }

    friend bool operator==(const MultiTree&, const MultiTree&) = default;
};

/// Encoder (k trees over p inputs) and decoder (p' trees over the k latent values).
struct AutoencoderMultiTree {
    MultiTree encoder;
    MultiTree decoder;

    std::size_t k() const noexcept { return encoder.k(); }
    std::size_t input_arity() const noexcept { return encoder.input_arity(); }
    std::size_t output_dims() const noexcept { return decoder.k(); }

    friend bool operator==(const AutoencoderMultiTree&, const AutoencoderMultiTree&) = default;
};

/// Tree lists a genome exposes to the variation operators; list i of one genome is
/// only ever paired with list i of another.
inline std::array<std::vector<Tree>*, 1> tree_lists(MultiTree& g) { return {&g.trees}; }
inline std::array<const std::vector<Tree>*, 1> tree_lists(const MultiTree& g) { return {&g.trees}; }
inline std::array<std::vector<Tree>*, 2> tree_lists(AutoencoderMultiTree& g) {
    return {&g.encoder.trees, &g.decoder.trees};
}
inline std::array<const std::vector<Tree>*, 2> tree_lists(const AutoencoderMultiTree& g) {
    return {&g.encoder.trees, &g.decoder.trees};
}

template <class G>
int max_depth(const G& g) {
    int d = 0;
    for (const auto* list : tree_lists(g))
        for (const auto& t : *list) d = std::max(d, t.depth());
    return d;
}

template <class G>
std::size_t total_nodes(const G& g) {
    std::size_t n = 0;
    for (const auto* list : tree_lists(g))
        for (const auto& t : *list) n += t.size();
    return n;
}

/// n x k matrix whose column j is tree j applied row-wise.
inline Matrix encode(const MultiTree& mt, const Matrix& x) {
    if (x.cols() != mt.input_arity())
        throw InvalidInput("encode: input has " + std::to_string(x.cols()) +
                           " columns, multi-tree expects " + std::to_string(mt.input_arity()));
    Matrix out(x.rows(), mt.k());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        for (std::size_t j = 0; j < mt.k(); ++j) out(i, j) = mt.trees[j].eval_unchecked(row);
    }
    return out;
}

struct Autoencoded {
    Matrix latent;
    Matrix reconstruction;
};

inline Autoencoded autoencode(const AutoencoderMultiTree& amt, const Matrix& x) {
    if (amt.decoder.input_arity() != amt.encoder.k())
        throw InvalidInput("autoencode: decoder arity does not match encoder width");
    Autoencoded out;
    out.latent = encode(amt.encoder, x);
    out.reconstruction = encode(amt.decoder, out.latent);
    return out;
}

}  // namespace gpdr::gp
