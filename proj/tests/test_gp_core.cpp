#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "gpdr/gp/generate.hpp"
#include "gpdr/gp/infix.hpp"
#include "gpdr/gp/multi_tree.hpp"
#include "oracles.hpp"

using namespace gpdr::gp;
using gpdr::Matrix;

namespace {

Tree make(std::vector<Node> n, std::size_t p) { return Tree(std::move(n), p); }

Node V(std::uint32_t j) { return Node::variable(j); }
Node C(double v) { return Node::constant(v); }
Node F(Op op) { return Node::function(op); }

double oracle_eval(const Tree& t, const std::vector<double>& x) {
    std::size_t pos = 0;
    return oracle::eval(t.nodes(), pos, x);
}

int oracle_depth(const Tree& t) {
    std::size_t pos = 0;
    return oracle::depth(t.nodes(), pos);
}

}  // namespace

TEST(Tree, EvaluatesSimpleExpression) {
    // (x0 + x1) * 2
    const Tree t = make({F(Op::Mul), F(Op::Add), V(0), V(1), C(2.0)}, 2);
    const std::vector<double> x{3.0, 4.0};
    EXPECT_DOUBLE_EQ(t.eval(x), 14.0);
    EXPECT_EQ(t.depth(), 2);
    EXPECT_EQ(t.size(), 5u);
}

TEST(Tree, ProtectedLogAndCos) {
    const Tree plog = make({F(Op::Plog), V(0)}, 1);
    EXPECT_NEAR(plog.eval(std::vector<double>{0.0}), std::log(1e-6), 1e-12);
    EXPECT_NEAR(plog.eval(std::vector<double>{-std::exp(1.0)}), std::log(std::exp(1.0) + 1e-6), 1e-12);
    const Tree c = make({F(Op::Cos), V(0)}, 1);
    EXPECT_DOUBLE_EQ(c.eval(std::vector<double>{0.0}), 1.0);
}

TEST(Tree, OverflowIsClampedAndNeverNonFinite) {
    // x0 * x0 * x0 * x0 with x0 = 1e6 overflows the clamp at every level.
    const Tree t = make({F(Op::Mul), F(Op::Mul), V(0), V(0), F(Op::Mul), V(0), V(0)}, 1);
    EXPECT_DOUBLE_EQ(t.eval(std::vector<double>{1e6}), 1e12);
    EXPECT_DOUBLE_EQ(t.eval(std::vector<double>{-1e6}), 1e12);
    const Tree neg = make({F(Op::Sub), C(0.0), F(Op::Mul), V(0), V(0)}, 1);
    EXPECT_DOUBLE_EQ(neg.eval(std::vector<double>{1e7}), -1e12);
}

TEST(Tree, SanitizeMapsNanToZero) {
    EXPECT_EQ(sanitize(NAN), 0.0);
    EXPECT_EQ(sanitize(INFINITY), 1e12);
    EXPECT_EQ(sanitize(-INFINITY), -1e12);
}

TEST(Tree, RejectsMalformedNodeLists) {
    EXPECT_THROW(make({}, 1), gpdr::InvalidInput);
    EXPECT_THROW(make({F(Op::Add), V(0)}, 1), gpdr::InvalidInput);
    EXPECT_THROW(make({V(0), V(0)}, 1), gpdr::InvalidInput);
    EXPECT_THROW(make({V(3)}, 2), gpdr::InvalidInput);
    EXPECT_THROW(make({C(NAN)}, 1), gpdr::InvalidInput);
}

TEST(Tree, EvalChecksRowLength) {
    const Tree t = make({V(0)}, 2);
    EXPECT_THROW(t.eval(std::vector<double>{1.0}), gpdr::InvalidInput);
    EXPECT_THROW(eval_rows(t, Matrix(3, 3)), gpdr::InvalidInput);
}

TEST(Tree, SubtreeReplacement) {
    // (x0 + x1) * 2 with the Add subtree replaced by cos(x1)
    const Tree t = make({F(Op::Mul), F(Op::Add), V(0), V(1), C(2.0)}, 2);
    EXPECT_EQ(t.subtree_end(1), 4u);
    const std::vector<Node> rep{F(Op::Cos), V(1)};
    const Tree r = t.with_subtree(1, rep);
    EXPECT_EQ(r.nodes(), (std::vector<Node>{F(Op::Mul), F(Op::Cos), V(1), C(2.0)}));
    EXPECT_EQ(r.node_depths(), (std::vector<int>{0, 1, 2, 1}));
}

TEST(Tree, RandomTreesMatchRecursiveOracle) {
    gpdr::Rng rng(17);
    PrimitiveSet ps{FunctionSet::Extended};
    std::normal_distribution<double> nd(0.0, 3.0);
    for (int t = 0; t < 300; ++t) {
        const Tree tree = generate_grow(0, 7, 4, ps, rng);
        EXPECT_EQ(tree.depth(), oracle_depth(tree));
        for (int r = 0; r < 5; ++r) {
            std::vector<double> x(4);
            for (auto& v : x) v = nd(rng);
            const double got = tree.eval(x), want = oracle_eval(tree, x);
            ASSERT_TRUE(std::isfinite(got));
            EXPECT_EQ(got, want);
        }
    }
}

TEST(Generate, FullTreesHaveAllLeavesAtDepth) {
    gpdr::Rng rng(3);
    const PrimitiveSet ps{};
    for (int d = 0; d <= 5; ++d) {
        const Tree t = generate_full(d, 3, ps, rng);
        const auto depths = t.node_depths();
        for (std::size_t i = 0; i < t.size(); ++i)
            if (is_terminal(t.nodes()[i].op)) { EXPECT_EQ(depths[i], d); }
        // Polynomial set is all binary, so a full tree is perfect.
        EXPECT_EQ(t.size(), (std::size_t{1} << (d + 1)) - 1);
    }
}

TEST(Generate, GrowRespectsDepthBounds) {
    gpdr::Rng rng(4);
    const PrimitiveSet ps{FunctionSet::Extended};
    for (int i = 0; i < 500; ++i) {
        const Tree t = generate_grow(2, 6, 5, ps, rng);
        const auto depths = t.node_depths();
        EXPECT_LE(t.depth(), 6);
        for (std::size_t n = 0; n < t.size(); ++n)
            if (is_terminal(t.nodes()[n].op)) { EXPECT_GE(depths[n], 2); }
    }
}

TEST(Generate, TerminalMixFollowsVariableProbability) {
    gpdr::Rng rng(5);
    const PrimitiveSet ps{};
    int vars = 0;
    const int draws = 20000;
    std::map<std::uint32_t, int> per_var;
    for (int i = 0; i < draws; ++i) {
        const Node n = random_terminal(4, ps, rng);
        if (n.op == Op::Variable) {
            ++vars;
            ++per_var[n.var];
        }
    }
    EXPECT_NEAR(static_cast<double>(vars) / draws, 0.9, 0.01);
    for (std::uint32_t j = 0; j < 4; ++j) EXPECT_NEAR(per_var[j] / static_cast<double>(vars), 0.25, 0.02);
}

TEST(Generate, RampedHalfAndHalfCoversDepthsAndMethods) {
    gpdr::Rng rng(6);
    const PrimitiveSet ps{};
    const auto pop = ramped_half_and_half(60, 3, 2, 2, 6, ps, rng);
    ASSERT_EQ(pop.size(), 60u);
    std::map<int, int> full_at_depth;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto& g = pop[i];
        EXPECT_EQ(g.k(), 2u);
        EXPECT_EQ(g.input_arity(), 3u);
        const int slot_depth = 2 + static_cast<int>(i % 5);
        EXPECT_LE(max_depth(g), slot_depth);
        if ((i / 5) % 2 == 0) {
            for (const auto& t : g.trees) EXPECT_EQ(t.depth(), slot_depth);
            ++full_at_depth[slot_depth];
        }
    }
    for (int d = 2; d <= 6; ++d) EXPECT_EQ(full_at_depth[d], 6);
    EXPECT_THROW(ramped_half_and_half(0, 3, 2, 2, 6, ps, rng), gpdr::InvalidInput);
    EXPECT_THROW(ramped_half_and_half(5, 3, 2, 4, 3, ps, rng), gpdr::InvalidInput);
}

TEST(Generate, AutoencoderShapes) {
    gpdr::Rng rng(7);
    const auto pop = ramped_half_and_half_autoencoder(10, 6, 2, 4, 2, 5, PrimitiveSet{}, rng);
    for (const auto& g : pop) {
        EXPECT_EQ(g.k(), 2u);
        EXPECT_EQ(g.input_arity(), 6u);
        EXPECT_EQ(g.output_dims(), 4u);
        EXPECT_EQ(g.decoder.input_arity(), 2u);
    }
}

TEST(MultiTree, EncodeColumnsAreTreeOutputs) {
    MultiTree mt;
    mt.trees.push_back(make({F(Op::Add), V(0), V(1)}, 2));
    mt.trees.push_back(make({F(Op::Mul), V(0), C(3.0)}, 2));
    const Matrix x = Matrix::from_rows({{1, 2}, {3, 4}, {-1, 0}});
    const Matrix z = encode(mt, x);
    ASSERT_EQ(z.rows(), 3u);
    ASSERT_EQ(z.cols(), 2u);
    EXPECT_EQ(z(1, 0), 7.0);
    EXPECT_EQ(z(2, 1), -3.0);
    EXPECT_THROW(encode(mt, Matrix(2, 3)), gpdr::InvalidInput);
}

TEST(MultiTree, AutoencodeChainsDecoder) {
    AutoencoderMultiTree amt;
    amt.encoder.trees.push_back(make({F(Op::Add), V(0), V(1)}, 2));
    amt.decoder.trees.push_back(make({F(Op::Mul), V(0), C(0.5)}, 1));
    amt.decoder.trees.push_back(make({V(0)}, 1));
    amt.decoder.trees.push_back(make({C(1.0)}, 1));
    const auto out = autoencode(amt, Matrix::from_rows({{2, 4}}));
    EXPECT_EQ(out.latent(0, 0), 6.0);
    EXPECT_EQ(out.reconstruction(0, 0), 3.0);
    EXPECT_EQ(out.reconstruction(0, 1), 6.0);
    EXPECT_EQ(out.reconstruction(0, 2), 1.0);
    EXPECT_EQ(total_nodes(amt), 3u + 3u + 1u + 1u);
}

TEST(Infix, PrintsWithMinimalParentheses) {
    const Tree t = make({F(Op::Mul), F(Op::Add), V(0), V(1), C(2.0)}, 2);
    EXPECT_EQ(to_infix(t), "(x0 + x1) * 2.000");
    const Tree s = make({F(Op::Sub), V(0), F(Op::Sub), V(1), V(2)}, 3);
    EXPECT_EQ(to_infix(s), "x0 - (x1 - x2)");
    const Tree l = make({F(Op::Sub), F(Op::Sub), V(0), V(1), V(2)}, 3);
    EXPECT_EQ(to_infix(l), "x0 - x1 - x2");
    const Tree u = make({F(Op::Plog), F(Op::Cos), V(0)}, 1);
    EXPECT_EQ(to_infix(u), "plog(cos(x0))");
}

TEST(Infix, UsesFeatureNamesAndPrecision) {
    const Tree t = make({F(Op::Add), V(1), C(0.123456)}, 2);
    EXPECT_EQ(to_infix(t, {"area", "hue"}, 2), "hue + 0.12");
    EXPECT_EQ(to_infix(t, {}, -1), "x1 + 0.123456");
}

TEST(Infix, NegationAndNegativeConstants) {
    const Tree neg = make({F(Op::Sub), C(0.0), V(0)}, 1);
    EXPECT_EQ(to_infix(neg), "-x0");
    const Tree mulneg = make({F(Op::Mul), V(0), C(-0.5)}, 1);
    EXPECT_EQ(to_infix(mulneg), "x0 * (-0.500)");
}

TEST(Infix, SimplifyFoldsConstantsAndIdentities) {
    // (x0 * 1) + (2 * 3 - 6)
    const Tree t = make({F(Op::Add), F(Op::Mul), V(0), C(1.0), F(Op::Sub), F(Op::Mul), C(2.0), C(3.0), C(6.0)}, 1);
    EXPECT_EQ(to_infix(t), "x0");
    const Tree z = make({F(Op::Mul), V(0), F(Op::Sub), V(0), C(0.0)}, 1);
    EXPECT_EQ(simplify(z).nodes(), (std::vector<Node>{F(Op::Mul), V(0), V(0)}));
    const Tree zero = make({F(Op::Mul), F(Op::Cos), V(0), C(0.0)}, 1);
    EXPECT_EQ(to_infix(zero), "0.000");
}

TEST(Infix, ParseErrors) {
    EXPECT_THROW(parse_infix("x0 +", 1), gpdr::InvalidInput);
    EXPECT_THROW(parse_infix("x5", 2), gpdr::InvalidInput);
    EXPECT_THROW(parse_infix("(x0", 1), gpdr::InvalidInput);
    EXPECT_THROW(parse_infix("x0 $ x1", 2), gpdr::InvalidInput);
    EXPECT_EQ(parse_infix("hue * 2", 2, {"area", "hue"}).nodes(), (std::vector<Node>{F(Op::Mul), V(1), C(2.0)}));
}

TEST(Infix, FullPrecisionRoundTripIsExact) {
    gpdr::Rng rng(21);
    const PrimitiveSet ps{FunctionSet::Extended};
    std::normal_distribution<double> nd(0.0, 2.0);
    for (int i = 0; i < 500; ++i) {
        const Tree t = generate_grow(0, 7, 5, ps, rng);
        const Tree s = simplify(t);
        const Tree back = parse_infix(to_infix(t, {}, -1), 5);
        EXPECT_EQ(back, s) << to_infix(t, {}, -1);
        std::vector<double> x(5);
        for (auto& v : x) v = nd(rng);
        const double a = t.eval(x), b = back.eval(x);
        EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(a)));
    }
}
