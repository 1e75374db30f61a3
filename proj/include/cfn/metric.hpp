#pragma once

#include <string>
#include <vector>

#include "cfn/tree.hpp"

namespace cfn {

/// Dense symmetric integer matrix over n points.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(int n, int fill = 0) : n_(n), d_(static_cast<std::size_t>(n) * n, fill) {
    for (int i = 0; i < n; ++i) d_[static_cast<std::size_t>(i) * n + i] = 0;
  }

  int size() const { return n_; }
  int operator()(int u, int v) const { return d_[static_cast<std::size_t>(u) * n_ + v]; }
  void set(int u, int v, int value) {
    d_[static_cast<std::size_t>(u) * n_ + v] = value;
    d_[static_cast<std::size_t>(v) * n_ + u] = value;
  }
  int max_value() const;

  bool operator==(const DistanceMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<int> d_;
};

/// Leaf distances capped at 2*ell + 2.
struct PartialMetric {
  int ell = 0;
  DistanceMatrix dist;

  int cap() const { return 2 * ell + 2; }
  int size() const { return dist.size(); }
  int operator()(int u, int v) const { return dist(u, v); }
  /// True when no off-diagonal entry sits at the cap, i.e. the values are
  /// the uncapped distances.
  bool is_complete() const;

  bool operator==(const PartialMetric&) const = default;
};

/// Sorted leaf indices.
using LeafSet = std::vector<int>;

/// Vertices within a few levels of the leaves, each named by the set of
/// leaves below it. levels[i] lists the vertices at height i sorted by
/// their smallest leaf; owner[i][w] is the position in levels[i] of the
/// height-i ancestor of leaf w.
struct Labeling {
  std::vector<std::vector<LeafSet>> levels;
  std::vector<std::vector<int>> owner;

  int height_count() const { return static_cast<int>(levels.size()); }
};

/// Raised by l_labeling when balls of the metric overlap without nesting.
class LabelingError : public ModelError {
 public:
  LabelingError(int u, int v, int level, const std::string& what)
      : ModelError(what), u_(u), v_(v), level_(level) {}
  int u() const { return u_; }
  int v() const { return v_; }
  int level() const { return level_; }

 private:
  int u_, v_, level_;
};

DistanceMatrix pairwise_leaf_distances(const BalancedTree& tree);

/// Path length between every pair of nodes (node-indexed).
DistanceMatrix pairwise_node_distances(const BalancedTree& tree);

PartialMetric cap_metric(const DistanceMatrix& d, int ell);

/// min(d(u,v), 2*ell + 2).
PartialMetric l_topology(const BalancedTree& tree, int ell);

/// Checks symmetry, zero diagonal, and that every entry is even and within
/// [2, cap] off the diagonal. Throws ModelError naming the first bad pair.
void validate_metric(const PartialMetric& pm);

/// Label sets {w' : d*(w,w') <= 2i} for i = 0..max_height (default ell).
/// Stops early once a level is the full leaf set. Throws LabelingError
/// naming a leaf pair whose balls disagree.
Labeling l_labeling(const PartialMetric& pm, int max_height = -1);

/// Rebuilds a balanced tree from its complete leaf metric. Node ids are
/// canonical: breadth-first from the root, siblings ordered by smallest leaf.
BalancedTree tree_from_metric(const DistanceMatrix& d);

}  // namespace cfn
