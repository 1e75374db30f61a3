#pragma once

#include <cstdint>
#include <vector>

#include "cfn/samples.hpp"
#include "cfn/tree.hpp"

namespace cfn {

/// Rows per independently seeded chunk. Chunk c of a run draws from
/// derive_seed(seed, c), so output does not depend on how chunks are
/// scheduled.
inline constexpr std::size_t kSampleChunk = 256;

/// k colorings of every node (columns in node order). The root is +1 with
/// probability params.root_plus; each child agrees with its parent with
/// probability (1 + theta_eff)/2.
SampleMatrix sample_cfn(const BalancedTree& tree, const EdgeParams& params, std::size_t k, std::uint64_t seed);

/// Leaf columns of sample_cfn, ordered by leaf index.
SampleMatrix sample_cfn_leaves(const BalancedTree& tree, const EdgeParams& params, std::size_t k,
                               std::uint64_t seed);

/// Restricts a full-tree coloring to the leaves, ordered by leaf index.
SampleMatrix restrict_to_leaves(const BalancedTree& tree, const SampleMatrix& full);

/// Leaf colorings through the random-cluster construction: each edge is
/// open with probability theta_eff, the root cluster takes the root color,
/// every other cluster gets an independent fair color.
SampleMatrix sample_random_cluster(const BalancedTree& tree, const EdgeParams& params, std::size_t k,
                                   std::uint64_t seed);

/// Exact leaf distribution of the CFN process, indexed by bit pattern
/// (bit i set means leaf i is +1). Dynamic programming over subtrees.
std::vector<double> exact_leaf_distribution(const BalancedTree& tree, const EdgeParams& params);

/// Exact leaf distribution of the random-cluster construction, by
/// enumerating all open/closed edge patterns. Intended for small trees.
std::vector<double> exact_cluster_leaf_distribution(const BalancedTree& tree, const EdgeParams& params);

/// Total variation distance between two distributions on the same index set.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace cfn
