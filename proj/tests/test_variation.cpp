#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gpdr/variation.hpp"

using namespace gpdr;
using gp::MultiTree;
using gp::Tree;

namespace {

std::vector<MultiTree> population(std::size_t n, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    return gp::ramped_half_and_half(n, 4, k, 2, 6, gp::PrimitiveSet{}, rng);
}

bool same_shape(const Tree& a, const Tree& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (gp::arity(a.nodes()[i].op) != gp::arity(b.nodes()[i].op)) return false;
    return true;
}

}  // namespace

TEST(Tournament, SizeOneIsUniform) {
    Rng rng(1);
    const std::vector<double> f{5, 1, 3, 2};
    std::vector<int> hits(4, 0);
    for (int i = 0; i < 40000; ++i) ++hits[tournament_select(f, 1, rng)];
    for (int h : hits) EXPECT_NEAR(h / 40000.0, 0.25, 0.01);
}

TEST(Tournament, SelectionProbabilityMatchesOrderStatistics) {
    // With distinct fitness, the member of rank r (0 = best) wins a size-t tournament
    // with probability ((n - r)^t - (n - r - 1)^t) / n^t.
    Rng rng(2);
    const std::vector<double> f{0.7, 0.1, 0.9, 0.3, 0.5};  // ranks 3,0,4,1,2
    const std::vector<int> rank{3, 0, 4, 1, 2};
    const int n = 5, t = 3, draws = 100000;
    std::vector<int> hits(5, 0);
    for (int i = 0; i < draws; ++i) ++hits[tournament_select(f, t, rng)];
    for (int i = 0; i < n; ++i) {
        const double r = rank[i];
        const double expect = (std::pow(n - r, t) - std::pow(n - r - 1, t)) / std::pow(n, t);
        EXPECT_NEAR(hits[i] / static_cast<double>(draws), expect, 0.006) << "member " << i;
    }
}

TEST(Tournament, TiesGoToLowestIndex) {
    Rng rng(3);
    const std::vector<double> f{1.0, 1.0};
    int zero = 0;
    for (int i = 0; i < 10000; ++i) zero += tournament_select(f, 2, rng) == 0;
    // Index 1 only wins when both draws are 1.
    EXPECT_NEAR(zero / 10000.0, 0.75, 0.015);
    EXPECT_THROW(tournament_select(std::vector<double>{}, 2, rng), InvalidInput);
}

TEST(Crossover, AttemptFrequencyPerTreeIndex) {
    const auto pop = population(40, 3, 4);
    Rng rng(5);
    VariationStats st;
    for (int i = 0; i < 3000; ++i)
        same_index_crossover(pop[i % 40], pop[(i + 7) % 40], 0.8, rng, gp::kMaxDepth, &st);
    EXPECT_EQ(st.crossover_opportunities, 9000u);
    EXPECT_NEAR(st.crossover_attempts / 9000.0, 0.8, 0.015);
}

TEST(Crossover, ChildrenStayWithinDepthLimitAndConserveMaterial) {
    const auto pop = population(40, 2, 6);
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const auto& a = pop[i % 40];
        const auto& b = pop[(i * 13 + 1) % 40];
        const auto [ca, cb] = same_index_crossover(a, b, 1.0, rng, 7);
        EXPECT_LE(gp::max_depth(ca), 7);
        EXPECT_LE(gp::max_depth(cb), 7);
        // Swapping subtrees moves nodes between same-index trees without creating any.
        for (std::size_t j = 0; j < 2; ++j)
            EXPECT_EQ(ca.trees[j].size() + cb.trees[j].size(), a.trees[j].size() + b.trees[j].size());
    }
}

TEST(Crossover, RejectedSwapKeepsParents) {
    // Parents have depth >= 2, so under a depth limit of 0 every swap is rejected.
    const auto pop = population(2, 1, 8);
    Rng rng(9);
    VariationStats st;
    const auto [ca, cb] = same_index_crossover(pop[0], pop[1], 1.0, rng, 0, &st);
    EXPECT_EQ(st.crossover_rejections, 1u);
    EXPECT_EQ(ca, pop[0]);
    EXPECT_EQ(cb, pop[1]);
}

TEST(Crossover, SameIndexOnly) {
    // Tree 0 of both parents reads only x0 and tree 1 only x1; after crossover the
    // children must still respect that split.
    MultiTree a, b;
    a.trees = {Tree({gp::Node::function(gp::Op::Add), gp::Node::variable(0), gp::Node::variable(0)}, 2),
               Tree({gp::Node::function(gp::Op::Mul), gp::Node::variable(1), gp::Node::variable(1)}, 2)};
    b = a;
    Rng rng(10);
    for (int i = 0; i < 200; ++i) {
        const auto [ca, cb] = same_index_crossover(a, b, 1.0, rng);
        for (const auto* c : {&ca, &cb}) {
            for (const auto& n : c->trees[0].nodes())
                if (n.op == gp::Op::Variable) { EXPECT_EQ(n.var, 0u); }
            for (const auto& n : c->trees[1].nodes())
                if (n.op == gp::Op::Variable) { EXPECT_EQ(n.var, 1u); }
        }
    }
}

TEST(Crossover, MismatchedTreeCountsThrow) {
    const auto a = population(1, 2, 11)[0];
    const auto b = population(1, 3, 12)[0];
    Rng rng(13);
    EXPECT_THROW(same_index_crossover(a, b, 1.0, rng), InvalidInput);
}

TEST(SubtreeMutation, FrequencyAndDepthLimit) {
    const auto pop = population(40, 4, 14);
    Rng rng(15);
    VariationStats st;
    for (int i = 0; i < 2500; ++i) {
        const auto m = subtree_mutation(pop[i % 40], 0.2, rng, gp::PrimitiveSet{gp::FunctionSet::Extended}, 7, &st);
        EXPECT_LE(gp::max_depth(m), 7);
    }
    EXPECT_NEAR(st.subtree_mutations / 10000.0, 0.2, 0.012);
}

TEST(OnePointMutation, PreservesShapeAndFrequency) {
    const auto pop = population(40, 4, 16);
    Rng rng(17);
    VariationStats st;
    int changed = 0;
    for (int i = 0; i < 2500; ++i) {
        const auto& g = pop[i % 40];
        const auto m = one_point_mutation(g, 0.2, rng, gp::PrimitiveSet{}, &st);
        for (std::size_t j = 0; j < 4; ++j) {
            EXPECT_TRUE(same_shape(g.trees[j], m.trees[j]));
            changed += !(g.trees[j] == m.trees[j]);
        }
    }
    EXPECT_NEAR(st.one_point_mutations / 10000.0, 0.2, 0.012);
    EXPECT_LE(static_cast<std::size_t>(changed), st.one_point_mutations);
    EXPECT_GT(changed, 0);
}

TEST(OnePointMutation, FunctionNodesSwapToADifferentOperator) {
    const Tree t({gp::Node::function(gp::Op::Add), gp::Node::variable(0), gp::Node::variable(0)}, 1);
    MultiTree g;
    g.trees = {t};
    Rng rng(18);
    int root_changes = 0;
    for (int i = 0; i < 3000; ++i) {
        const auto m = one_point_mutation(g, 1.0, rng);
        const auto op = m.trees[0].nodes()[0].op;
        EXPECT_TRUE(op == gp::Op::Add || op == gp::Op::Sub || op == gp::Op::Mul);
        root_changes += op != gp::Op::Add;
    }
    EXPECT_NEAR(root_changes / 3000.0, 1.0 / 3.0, 0.03);
}

TEST(NextGeneration, SizeElitismAndDeterminism) {
    const auto pop = population(30, 2, 19);
    std::vector<double> fit(30);
    for (std::size_t i = 0; i < 30; ++i) fit[i] = static_cast<double>((i * 7) % 30);
    VariationConfig cfg;
    cfg.elitism = 2;
    Rng r1(20), r2(20);
    const auto a = next_generation(pop, fit, cfg, r1);
    const auto b = next_generation(pop, fit, cfg, r2);
    ASSERT_EQ(a.size(), 30u);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a[0], pop[0]);   // fitness 0
    EXPECT_EQ(a[1], pop[13]);  // fitness 1
    for (const auto& g : a) EXPECT_LE(gp::max_depth(g), gp::kMaxDepth);
}

TEST(NextGeneration, ValidatesInputs) {
    const auto pop = population(4, 1, 21);
    Rng rng(22);
    VariationConfig cfg;
    EXPECT_THROW(next_generation(pop, std::vector<double>(3, 0.0), cfg, rng), InvalidInput);
    cfg.crossover_rate = 1.5;
    EXPECT_THROW(next_generation(pop, std::vector<double>(4, 0.0), cfg, rng), InvalidInput);
    cfg = {};
    cfg.elitism = 4;
    EXPECT_THROW(next_generation(pop, std::vector<double>(4, 0.0), cfg, rng), InvalidInput);
}
