#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfn {

/// Raised when a tree, its parameters, or a derived structure violates a
/// model contract.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rooted tree whose leaves all sit at the same depth. Immutable once built.
///
/// Nodes are dense integers. Leaves additionally carry a leaf index in
/// [0, n); leaf index i is written as label i+1 in every external format.
class BalancedTree {
 public:
  /// Validates and builds a tree from a parent array (the root maps to
  /// itself) and the node of every leaf index. Children keep ascending node
  /// order. Throws ModelError if the tree is not balanced, a non-root
  /// internal node has fewer than two children, or leaf_nodes is not a
  /// bijection onto the leaves.
  static BalancedTree from_parents(std::vector<int> parent, std::vector<int> leaf_nodes);

  int node_count() const { return static_cast<int>(parent_.size()); }
  int leaf_count() const { return static_cast<int>(leaf_nodes_.size()); }
  int edge_count() const { return node_count() - 1; }
  /// Common root-to-leaf distance q.
  int depth() const { return depth_; }
  int root() const { return root_; }

  int parent(int v) const { return parent_[v]; }
  const std::vector<int>& children(int v) const { return children_[v]; }
  bool is_leaf(int v) const { return leaf_index_[v] >= 0; }
  /// Distance from the root.
  int level(int v) const { return level_[v]; }
  /// Distance to the leaves (the tree is balanced, so this is depth - level).
  int height(int v) const { return depth_ - level_[v]; }

  int leaf_node(int leaf) const { return leaf_nodes_[leaf]; }
  /// Leaf index of v, or -1 for internal nodes.
  int leaf_index(int v) const { return leaf_index_[v]; }
  const std::vector<int>& leaf_nodes() const { return leaf_nodes_; }

  /// Sorted leaf indices below v (the label set of v).
  std::vector<int> leaves_below(int v) const;
  int lca(int u, int v) const;
  /// Edge count on the path between two nodes.
  int path_length(int u, int v) const;
  /// Nodes on the path from u up to (excluding) ancestor a; each names the
  /// edge to its parent.
  std::vector<int> edges_up_to(int u, int a) const;
  /// Nodes in breadth-first order from the root.
  const std::vector<int>& bfs_order() const { return bfs_; }

  /// True when every non-root internal node has >= b children and the root
  /// has >= b+1 (the space of trees with internal degree at least b+1).
  bool has_min_branching(int b) const;

 private:
  BalancedTree() = default;

  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<int> level_;
  std::vector<int> leaf_nodes_;
  std::vector<int> leaf_index_;
  std::vector<int> bfs_;
  int root_ = 0;
  int depth_ = 0;
};

/// ell-level tree where every internal node has exactly b children;
/// b^ell leaves numbered left to right.
BalancedTree build_bary_tree(int b, int ell);

/// Root with b+1 children, each the root of a q-level b-ary tree; depth q+1,
/// (b+1)*b^q leaves numbered left to right.
BalancedTree build_regular_star_tree(int b, int q);

/// The regular star shape with leaf labels assigned by a uniform random
/// permutation, which is uniform over topologies since every topology class
/// has the same number of labelings.
BalancedTree random_uniform_topology(int b, int q, std::uint64_t seed);

/// Balanced tree of depth `depth` with a random number of children in
/// [b, max_children] per non-root internal node and [b+1, max_children+1]
/// at the root, leaves randomly labelled. Members of the >= b family.
BalancedTree random_branching_tree(int b, int max_children, int depth, std::uint64_t seed);

/// Same shape, leaf index i renamed to perm[i].
BalancedTree relabel_leaves(const BalancedTree& tree, const std::vector<int>& perm);

/// Per-edge fidelities and per-leaf attenuations of a CFN(theta, eta) model.
///
/// theta[v] is the fidelity of the edge from parent(v) into v (the root
/// entry is ignored), eta[i] attenuates the edge into leaf index i. Values
/// live in [0,1]; zero fidelity is allowed here and rejected only where a
/// logarithm of it is needed.
struct EdgeParams {
  std::vector<double> theta;
  std::vector<double> eta;
  /// Probability that the root is +1.
  double root_plus = 0.5;

  static EdgeParams uniform(const BalancedTree& tree, double theta, double eta = 1.0);
  /// Edge fidelities drawn uniformly from [lo, hi], eta fixed.
  static EdgeParams random_interval(const BalancedTree& tree, double lo, double hi,
                                    std::uint64_t seed, double eta = 1.0);

  /// theta(e) * eta(v) on leaf edges, theta(e) elsewhere.
  double effective(const BalancedTree& tree, int v) const;
  /// Throws ModelError on domain mismatch or values outside [0,1].
  void validate(const BalancedTree& tree) const;
};

}  // namespace cfn
