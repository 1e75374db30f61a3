#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cfn/distance.hpp"
#include "cfn/sampling.hpp"
#include "shapes.hpp"

using namespace cfn;

namespace {

// Exact leaf distribution by summing over every full coloring of the tree.
std::vector<double> brute_force_leaves(const BalancedTree& t, const EdgeParams& p) {
  const int nodes = t.node_count();
  std::vector<double> dist(std::size_t{1} << t.leaf_count(), 0.0);
  for (std::uint32_t colors = 0; colors < (1u << nodes); ++colors) {
    auto plus = [&](int v) { return (colors >> v) & 1; };
    double pr = plus(t.root()) ? p.root_plus : 1 - p.root_plus;
    for (int v = 0; v < nodes; ++v) {
      if (v == t.root()) continue;
      const double th = p.effective(t, v);
      pr *= plus(v) == plus(t.parent(v)) ? (1 + th) / 2 : (1 - th) / 2;
    }
    std::size_t x = 0;
    for (int i = 0; i < t.leaf_count(); ++i) x |= static_cast<std::size_t>(plus(t.leaf_node(i))) << i;
    dist[x] += pr;
  }
  return dist;
}

}  // namespace

TEST(Sampling, PerfectChannelsCopyRoot) {
  const BalancedTree t = build_bary_tree(2, 3);
  const SampleMatrix s = sample_cfn(t, EdgeParams::uniform(t, 1.0), 500, 1);
  for (std::size_t r = 0; r < s.k(); ++r)
    for (std::size_t j = 1; j < s.width(); ++j) EXPECT_EQ(s.at(r, j), s.at(r, 0));
}

TEST(Sampling, SingleEdgeAgreement) {
  const BalancedTree t = BalancedTree::from_parents({0, 0, 0}, {1, 2});
  const EdgeParams p = EdgeParams::uniform(t, 0.8);
  constexpr std::size_t k = 100000;
  const SampleMatrix s = sample_cfn(t, p, k, 2);
  std::size_t agree = 0;
  for (std::size_t r = 0; r < k; ++r) agree += s.at(r, 0) == s.at(r, 1);
  const double rate = static_cast<double>(agree) / k;
  EXPECT_NEAR(rate, 0.9, 3 * std::sqrt(0.9 * 0.1 / k));
}

TEST(Sampling, PathProductCorrelation) {
  const BalancedTree t = BalancedTree::from_parents({0, 0, 0}, {1, 2});
  constexpr std::size_t k = 100000;
  const CorrelationTable c = correlations(sample_cfn_leaves(t, EdgeParams::uniform(t, 0.9), k, 3));
  EXPECT_NEAR(c(0, 1), 0.81, 3 * std::sqrt((1 - 0.81 * 0.81) / k));
}

TEST(Sampling, LeavesMatchRestriction) {
  const BalancedTree t = random_uniform_topology(2, 3, 4);
  const EdgeParams p = EdgeParams::random_interval(t, 0.6, 0.9, 5, 0.8);
  const SampleMatrix full = sample_cfn(t, p, 700, 6);
  EXPECT_EQ(sample_cfn_leaves(t, p, 700, 6), restrict_to_leaves(t, full));
}

TEST(Sampling, PrefixStable) {
  const BalancedTree t = build_regular_star_tree(2, 2);
  const EdgeParams p = EdgeParams::uniform(t, 0.85);
  EXPECT_EQ(sample_cfn_leaves(t, p, 300, 8), sample_cfn_leaves(t, p, 1000, 8).head(300));
}

TEST(Sampling, ClusterExtremes) {
  const BalancedTree t = build_bary_tree(2, 3);
  const SampleMatrix one = sample_random_cluster(t, EdgeParams::uniform(t, 1.0), 200, 1);
  for (std::size_t r = 0; r < one.k(); ++r)
    for (std::size_t j = 1; j < one.width(); ++j) EXPECT_EQ(one.at(r, j), one.at(r, 0));
  const CorrelationTable c = correlations(sample_random_cluster(t, EdgeParams::uniform(t, 0.0), 20000, 2));
  for (int u = 0; u < 8; ++u)
    for (int v = u + 1; v < 8; ++v) EXPECT_LT(std::abs(c(u, v)), 4 / std::sqrt(20000.0));
}

TEST(Sampling, ExactDistributionMatchesFullEnumeration) {
  for (const auto& shape : cfn::testing::all_shapes(6)) {
    const BalancedTree t = cfn::testing::to_tree(shape);
    EdgeParams p = EdgeParams::random_interval(t, 0.1, 0.95, t.node_count(), 0.7);
    p.root_plus = 0.35;
    EXPECT_LT(total_variation(exact_leaf_distribution(t, p), brute_force_leaves(t, p)), 1e-12);
  }
}

TEST(Sampling, ClusterMatchesCfnOnFourLeafTree) {
  const BalancedTree t = build_bary_tree(2, 2);
  EdgeParams p = EdgeParams::uniform(t, 0.5);
  for (std::size_t v = 0; v < p.theta.size(); ++v) p.theta[v] = 0.2 + 0.1 * static_cast<double>(v);
  const auto cfn = exact_leaf_distribution(t, p);
  EXPECT_NEAR(std::accumulate(cfn.begin(), cfn.end(), 0.0), 1.0, 1e-12);
  EXPECT_LT(total_variation(cfn, exact_cluster_leaf_distribution(t, p)), 1e-12);
}

TEST(Sampling, EmpiricalMatchesExact) {
  const BalancedTree t = build_bary_tree(2, 2);
  const EdgeParams p = EdgeParams::uniform(t, 0.7);
  constexpr std::size_t k = 40000;
  const SampleMatrix s = sample_cfn_leaves(t, p, k, 10);
  std::vector<double> freq(16, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    std::size_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::size_t>(s.at(r, i) > 0) << i;
    freq[x] += 1.0 / k;
  }
  const auto exact = exact_leaf_distribution(t, p);
  for (int x = 0; x < 16; ++x) EXPECT_NEAR(freq[x], exact[x], 4 * std::sqrt(exact[x] * (1 - exact[x]) / k));
}
