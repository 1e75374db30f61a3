#include <gtest/gtest.h>

#include <map>

#include "cfn/metric.hpp"
#include "cfn/tree.hpp"

using namespace cfn;

TEST(Tree, BaryCounts) {
  const BalancedTree single = build_bary_tree(2, 0);
  EXPECT_EQ(single.node_count(), 1);
  EXPECT_EQ(single.leaf_count(), 1);

  const BalancedTree t = build_bary_tree(2, 3);
  EXPECT_EQ(t.leaf_count(), 8);
  EXPECT_EQ(t.node_count(), 15);
  EXPECT_EQ(t.children(t.root()).size(), 2u);

  const BalancedTree t3 = build_bary_tree(3, 2);
  EXPECT_EQ(t3.leaf_count(), 9);
  EXPECT_EQ(t3.node_count(), 1 + 3 + 9);
}

TEST(Tree, RegularStarSizes) {
  EXPECT_EQ(build_regular_star_tree(2, 0).leaf_count(), 3);
  EXPECT_EQ(build_regular_star_tree(2, 4).leaf_count(), 48);
  EXPECT_EQ(build_regular_star_tree(3, 2).leaf_count(), 36);
  const BalancedTree t = build_regular_star_tree(2, 2);
  EXPECT_EQ(t.depth(), 3);
  EXPECT_TRUE(t.has_min_branching(2));
  EXPECT_FALSE(t.has_min_branching(3));
}

TEST(Tree, EveryLeafAtSameDepth) {
  const BalancedTree t = random_branching_tree(2, 4, 4, 99);
  for (int i = 0; i < t.leaf_count(); ++i) EXPECT_EQ(t.level(t.leaf_node(i)), t.depth());
  EXPECT_TRUE(t.has_min_branching(2));
}

TEST(Tree, RejectsUnbalancedAndUnary) {
  // Root 0 with a leaf child 1 and an internal child 2 holding leaves 3, 4.
  EXPECT_THROW(BalancedTree::from_parents({0, 0, 0, 2, 2}, {1, 3, 4}), ModelError);
  // Internal node 1 with a single child.
  EXPECT_THROW(BalancedTree::from_parents({0, 0, 1, 0, 3, 3}, {2, 4, 5}), ModelError);
  // Leaf labels not a bijection.
  EXPECT_THROW(BalancedTree::from_parents({0, 0, 0}, {1, 1}), ModelError);
  // Two roots.
  EXPECT_THROW(BalancedTree::from_parents({0, 1, 0}, {2}), ModelError);
}

TEST(Tree, LcaAndPaths) {
  const BalancedTree t = build_bary_tree(2, 2);
  const int a = t.leaf_node(0), b = t.leaf_node(1), c = t.leaf_node(2);
  EXPECT_EQ(t.lca(a, b), t.parent(a));
  EXPECT_EQ(t.lca(a, c), t.root());
  EXPECT_EQ(t.path_length(a, b), 2);
  EXPECT_EQ(t.path_length(a, c), 4);
  EXPECT_EQ(t.edges_up_to(a, t.root()).size(), 2u);
  EXPECT_EQ(t.leaves_below(t.root()), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Tree, UniformTopologyDeterministic) {
  const BalancedTree a = random_uniform_topology(2, 3, 5);
  const BalancedTree b = random_uniform_topology(2, 3, 5);
  EXPECT_EQ(pairwise_leaf_distances(a), pairwise_leaf_distances(b));
  EXPECT_NE(pairwise_leaf_distances(a), pairwise_leaf_distances(random_uniform_topology(2, 3, 6)));
}

TEST(Tree, SingleTopologyAtQZero) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const DistanceMatrix d = pairwise_leaf_distances(random_uniform_topology(2, 0, s));
    for (int u = 0; u < 3; ++u)
      for (int v = 0; v < 3; ++v) EXPECT_EQ(d(u, v), u == v ? 0 : 2);
  }
}

TEST(Tree, UniformTopologyChiSquare) {
  // b=2, q=1: 6 leaves in three cherries, 6!/(2!^3 3!) = 15 topologies.
  std::map<std::vector<int>, int> counts;
  constexpr int kDraws = 15000;
  for (int s = 0; s < kDraws; ++s) {
    const DistanceMatrix d = pairwise_leaf_distances(random_uniform_topology(2, 1, s));
    std::vector<int> key;
    for (int u = 0; u < 6; ++u)
      for (int v = u + 1; v < 6; ++v) key.push_back(d(u, v));
    ++counts[key];
  }
  ASSERT_EQ(counts.size(), 15u);
  const double expected = kDraws / 15.0;
  double chi2 = 0;
  for (const auto& [_, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 14 degrees of freedom; the 0.999 quantile is 36.12.
  EXPECT_LT(chi2, 36.12);
}

TEST(Tree, RelabelPermutesDistances) {
  const BalancedTree t = build_bary_tree(2, 2);
  const std::vector<int> perm{2, 0, 3, 1};
  const BalancedTree r = relabel_leaves(t, perm);
  const DistanceMatrix d = pairwise_leaf_distances(t), e = pairwise_leaf_distances(r);
  for (int u = 0; u < 4; ++u)
    for (int v = 0; v < 4; ++v) EXPECT_EQ(e(perm[u], perm[v]), d(u, v));
}

TEST(EdgeParams, EffectiveAndValidate) {
  const BalancedTree t = build_bary_tree(2, 1);
  EdgeParams p = EdgeParams::uniform(t, 0.8, 0.5);
  EXPECT_DOUBLE_EQ(p.effective(t, t.leaf_node(0)), 0.4);
  EXPECT_NO_THROW(p.validate(t));
  p.theta[t.leaf_node(1)] = 1.5;
  EXPECT_THROW(p.validate(t), ModelError);
  const EdgeParams r = EdgeParams::random_interval(build_bary_tree(2, 4), 0.8, 0.9, 1);
  for (std::size_t v = 1; v < r.theta.size(); ++v) {
    EXPECT_GE(r.theta[v], 0.8);
    EXPECT_LE(r.theta[v], 0.9);
  }
}
