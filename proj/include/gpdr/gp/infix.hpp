#pragma once

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "gpdr/gp/tree.hpp"

namespace gpdr::gp {

namespace detail {

inline bool is_const(const std::vector<Node>& n, double v) {
    return n.size() == 1 && n[0].op == Op::Constant && n[0].value == v;
}

inline bool is_const(const std::vector<Node>& n) { return n.size() == 1 && n[0].op == Op::Constant; }

inline std::vector<Node> simplify_at(const std::vector<Node>& nodes, std::size_t& pos) {
    const Node n = nodes[pos++];
    const int a = arity(n.op);
    if (a == 0) return {n};
    if (a == 1) {
        auto child = simplify_at(nodes, pos);
        if (is_const(child)) return {Node::constant(apply_op(n.op, child[0].value))};
        std::vector<Node> out{n};
        out.insert(out.end(), child.begin(), child.end());
        return out;
    }
    auto lhs = simplify_at(nodes, pos);
    auto rhs = simplify_at(nodes, pos);
    if (is_const(lhs) && is_const(rhs)) return {Node::constant(apply_op(n.op, lhs[0].value, rhs[0].value))};
    switch (n.op) {
        case Op::Add:
            if (is_const(lhs, 0.0)) return rhs;
            if (is_const(rhs, 0.0)) return lhs;
            break;
        case Op::Sub:
            if (is_const(rhs, 0.0)) return lhs;
            break;
        case Op::Mul:
            if (is_const(lhs, 0.0) || is_const(rhs, 0.0)) return {Node::constant(0.0)};
            if (is_const(lhs, 1.0)) return rhs;
            if (is_const(rhs, 1.0)) return lhs;
            break;
        default: break;
    }
    std::vector<Node> out{n};
    out.insert(out.end(), lhs.begin(), lhs.end());
    out.insert(out.end(), rhs.begin(), rhs.end());
    return out;
}

inline std::string format_number(double v, int precision) {
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[64];
    auto res = precision < 0 ? std::to_chars(buf, buf + sizeof buf, v)
                             : std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

struct Printed {
    std::string text;
    int prec;  // 1: additive or negation, 2: product, 4: atom
};

inline Printed print_at(const std::vector<Node>& nodes, std::size_t& pos,
                        const std::vector<std::string>& names, int precision) {
    const Node n = nodes[pos++];
    switch (n.op) {
        case Op::Variable:
            return {n.var < names.size() ? names[n.var] : "x" + std::to_string(n.var), 4};
        case Op::Constant: {
            auto s = format_number(n.value, precision);
            return {s, s.front() == '-' ? 1 : 4};
        }
        case Op::Cos:
        case Op::Plog: {
            auto arg = print_at(nodes, pos, names, precision);
            return {std::string(n.op == Op::Cos ? "cos(" : "plog(") + arg.text + ")", 4};
        }
        default: break;
    }
    const bool negation = n.op == Op::Sub && nodes[pos].op == Op::Constant && nodes[pos].value == 0.0 &&
                          !std::signbit(nodes[pos].value);
    auto lhs = print_at(nodes, pos, names, precision);
    auto rhs = print_at(nodes, pos, names, precision);
    if (negation) {
        const std::string operand = rhs.prec < 4 ? "(" + rhs.text + ")" : rhs.text;
        return {"-" + operand, 1};
    }
    const int prec = n.op == Op::Mul ? 2 : 1;
    const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : " * ";
    // Right operands of equal precedence keep their parentheses so re-parsing yields
    // the identical (left-associative) tree.
    const std::string l = lhs.prec < prec ? "(" + lhs.text + ")" : lhs.text;
    const std::string r = rhs.prec <= prec ? "(" + rhs.text + ")" : rhs.text;
    return {l + sym + r, prec};
}

class InfixParser {
public:
    InfixParser(std::string_view src, std::size_t arity, const std::vector<std::string>& names)
        : src_(src), arity_(arity), names_(names) {}

    std::vector<Node> parse() {
        auto out = expression();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return out;
    }

private:
    static std::vector<Node> binary(Op op, std::vector<Node> l, const std::vector<Node>& r) {
        l.insert(l.begin(), Node::function(op));
        l.insert(l.end(), r.begin(), r.end());
        return l;
    }

    std::vector<Node> expression() {
        auto lhs = term();
        while (true) {
            skip_ws();
            if (peek('+')) {
                ++pos_;
                lhs = binary(Op::Add, std::move(lhs), term());
            } else if (peek('-')) {
                ++pos_;
                lhs = binary(Op::Sub, std::move(lhs), term());
            } else {
                return lhs;
            }
        }
    }

    std::vector<Node> term() {
        auto lhs = unary();
        while (true) {
            skip_ws();
            if (!peek('*')) return lhs;
            ++pos_;
            lhs = binary(Op::Mul, std::move(lhs), unary());
        }
    }

    std::vector<Node> unary() {
        skip_ws();
        if (peek('-')) {
            ++pos_;
            auto operand = unary();
            if (operand.size() == 1 && operand[0].op == Op::Constant) {
                operand[0].value = -operand[0].value;
                return operand;
            }
            return binary(Op::Sub, {Node::constant(0.0)}, operand);
        }
        return primary();
    }

    std::vector<Node> primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = expression();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return {Node::constant(number())};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const auto id = identifier();
            skip_ws();
            if ((id == "cos" || id == "plog") && peek('(')) {
                ++pos_;
                auto arg = expression();
                expect(')');
                arg.insert(arg.begin(), Node::function(id == "cos" ? Op::Cos : Op::Plog));
                return arg;
            }
            return {Node::variable(variable_index(id))};
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    double number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                ++pos_;
            } else if ((c == 'e' || c == 'E') && pos_ + 1 < src_.size()) {
                ++pos_;
                if (src_[pos_] == '+' || src_[pos_] == '-') ++pos_;
            } else {
                break;
            }
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (ec != std::errc{} || ptr != src_.data() + pos_) fail("malformed number");
        return v;
    }

    std::string identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    std::uint32_t variable_index(const std::string& id) {
        for (std::size_t j = 0; j < names_.size(); ++j)
            if (names_[j] == id) return static_cast<std::uint32_t>(j);
        if (id.size() > 1 && id[0] == 'x') {
            std::uint32_t j = 0;
            const auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), j);
            if (ec == std::errc{} && ptr == id.data() + id.size() && j < arity_) return j;
        }
        fail("unknown variable '" + id + "'");
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool peek(char c) const { return pos_ < src_.size() && src_[pos_] == c; }
    void expect(char c) {
        skip_ws();
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++pos_;
    }
    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidInput("parse_infix: " + why + " at offset " + std::to_string(pos_));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t arity_;
    const std::vector<std::string>& names_;
};

}  // namespace detail

/// Folds constant subtrees and removes +0, -0, *1 and *0 identities.
inline Tree simplify(const Tree& t) {
    std::size_t pos = 0;
    return Tree(detail::simplify_at(t.nodes(), pos), t.input_arity());
}

/// Parenthesised infix of the simplified tree. `constant_precision` < 0 prints
/// constants in shortest round-trip form; otherwise with that many decimals.
inline std::string to_infix(const Tree& t, const std::vector<std::string>& feature_names = {},
                            int constant_precision = 3) {
    const Tree s = simplify(t);
    std::size_t pos = 0;
    return detail::print_at(s.nodes(), pos, feature_names, constant_precision).text;
}

inline Tree parse_infix(std::string_view text, std::size_t input_arity,
                        const std::vector<std::string>& feature_names = {}) {
    detail::InfixParser parser(text, input_arity, feature_names);
    return Tree(parser.parse(), input_arity);
}

}  // namespace gpdr::gp
