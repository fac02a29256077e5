#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpdr/errors.hpp"
#include "gpdr/numerics.hpp"

namespace gpdr::gp {

enum class Op : std::uint8_t { Variable, Constant, Add, Sub, Mul, Cos, Plog };

constexpr int arity(Op op) noexcept {
    switch (op) {
        case Op::Variable:
        case Op::Constant: return 0;
        case Op::Cos:
        case Op::Plog: return 1;
        case Op::Add:
        case Op::Sub:
        case Op::Mul: return 2;
    }
    return 0;
}

constexpr bool is_terminal(Op op) noexcept { return arity(op) == 0; }

enum class FunctionSet : std::uint8_t {
    Polynomial,  // {-, +, *}
    Extended,    // {-, +, *, cos, plog}
};

inline std::span<const Op> operators(FunctionSet fs) noexcept {
    static constexpr Op poly[] = {Op::Sub, Op::Add, Op::Mul};
    static constexpr Op ext[] = {Op::Sub, Op::Add, Op::Mul, Op::Cos, Op::Plog};
    if (fs == FunctionSet::Polynomial) return poly;
    return ext;
}

inline constexpr double kValueClamp = 1e12;
inline constexpr double kPlogEpsilon = 1e-6;
inline constexpr int kMaxDepth = 7;

/// NaN becomes 0 and magnitudes are capped at 1e12 after every operator.
inline double sanitize(double v) noexcept {
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, -kValueClamp, kValueClamp);
}

inline double apply_op(Op op, double a, double b = 0.0) noexcept {
    switch (op) {
        case Op::Add: return sanitize(a + b);
        case Op::Sub: return sanitize(a - b);
        case Op::Mul: return sanitize(a * b);
        case Op::Cos: return sanitize(std::cos(a));
        case Op::Plog: return sanitize(std::log(std::abs(a) + kPlogEpsilon));
        default: return 0.0;
    }
}

struct Node {
    Op op = Op::Constant;
    std::uint32_t var = 0;  // Variable only
    double value = 0.0;     // Constant only

    static Node variable(std::uint32_t j) { return {Op::Variable, j, 0.0}; }
    static Node constant(double v) { return {Op::Constant, 0, v}; }
    static Node function(Op op) { return {op, 0, 0.0}; }

    friend bool operator==(const Node&, const Node&) = default;
};

/// Expression tree stored as a prefix-order node list.
class Tree {
public:
    Tree() = default;

    Tree(std::vector<Node> nodes, std::size_t input_arity)
        : nodes_(std::move(nodes)), input_arity_(input_arity) {
        validate();
    }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t input_arity() const noexcept { return input_arity_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// One past the last node of the subtree rooted at `pos`.
    std::size_t subtree_end(std::size_t pos) const noexcept {
        std::size_t need = 1;
        std::size_t i = pos;
        while (need > 0) {
            need += static_cast<std::size_t>(arity(nodes_[i].op));
            --need;
            ++i;
        }
        return i;
    }

    /// Depth of every node (root = 0).
    std::vector<int> node_depths() const {
        std::vector<int> depths(nodes_.size(), 0);
        std::vector<std::pair<int, int>> stack;  // (depth of open node, children still expected)
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            int d = 0;
            if (!stack.empty()) {
                d = stack.back().first + 1;
                if (--stack.back().second == 0) stack.pop_back();
            }
            depths[i] = d;
            if (const int a = arity(nodes_[i].op); a > 0) stack.emplace_back(d, a);
        }
        return depths;
    }

    int depth() const {
        const auto d = node_depths();
        return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
    }

    double eval(std::span<const double> row) const {
        if (row.size() != input_arity_)
            throw InvalidInput("eval_tree: row has " + std::to_string(row.size()) +
                               " values, tree expects " + std::to_string(input_arity_));
        std::size_t pos = 0;
        return eval_at(pos, row);
    }

    /// Evaluation without the arity check, for hot loops that validated once.
    double eval_unchecked(std::span<const double> row) const noexcept {
        std::size_t pos = 0;
        return eval_at(pos, row);
    }

    Tree with_subtree(std::size_t pos, std::span<const Node> replacement) const {
        const std::size_t end = subtree_end(pos);
        std::vector<Node> out;
        out.reserve(nodes_.size() - (end - pos) + replacement.size());
        out.insert(out.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(pos));
        out.insert(out.end(), replacement.begin(), replacement.end());
        out.insert(out.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end), nodes_.end());
        return Tree(std::move(out), input_arity_);
    }

    std::span<const Node> subtree(std::size_t pos) const noexcept {
        return std::span<const Node>(nodes_).subspan(pos, subtree_end(pos) - pos);
    }

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    void validate() const {
        if (nodes_.empty()) throw InvalidInput("Tree: no nodes");
        std::size_t need = 1;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (need == 0) throw InvalidInput("Tree: trailing nodes after complete expression");
            const Node& n = nodes_[i];
            if (n.op == Op::Variable && n.var >= input_arity_)
                throw InvalidInput("Tree: variable x" + std::to_string(n.var) +
                                   " outside input arity " + std::to_string(input_arity_));
            if (n.op == Op::Constant && !std::isfinite(n.value))
                throw InvalidInput("Tree: non-finite constant");
            need = need - 1 + static_cast<std::size_t>(arity(n.op));
        }
        if (need != 0) throw InvalidInput("Tree: incomplete expression");
    }

    double eval_at(std::size_t& pos, std::span<const double> row) const noexcept {
        const Node& n = nodes_[pos++];
        switch (n.op) {
            case Op::Variable: return row[n.var];
            case Op::Constant: return n.value;
            case Op::Cos:
            case Op::Plog: return apply_op(n.op, eval_at(pos, row));
            default: {
                const double a = eval_at(pos, row);
                const double b = eval_at(pos, row);
                return apply_op(n.op, a, b);
            }
        }
    }

    std::vector<Node> nodes_;
    std::size_t input_arity_ = 0;
};

inline double eval_tree(const Tree& t, std::span<const double> row) { return t.eval(row); }
inline std::size_t node_count(const Tree& t) noexcept { return t.size(); }
inline int depth(const Tree& t) { return t.depth(); }

/// Applies the tree to every row of `x`.
inline std::vector<double> eval_rows(const Tree& t, const Matrix& x) {
    if (x.cols() != t.input_arity())
        throw InvalidInput("eval_tree: matrix has " + std::to_string(x.cols()) +
                           " columns, tree expects " + std::to_string(t.input_arity()));
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = t.eval_unchecked(x.row(i));
    return out;
}

}  // namespace gpdr::gp
