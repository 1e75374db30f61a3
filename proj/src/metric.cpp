#include "cfn/metric.hpp"

#include <algorithm>
#include <map>

namespace cfn {

int DistanceMatrix::max_value() const {
  return d_.empty() ? 0 : *std::max_element(d_.begin(), d_.end());
}

bool PartialMetric::is_complete() const {
  for (int u = 0; u < size(); ++u) {
    for (int v = u + 1; v < size(); ++v) {
      if (dist(u, v) >= cap()) return false;
    }
  }
  return true;
}

DistanceMatrix pairwise_node_distances(const BalancedTree& tree) {
  const int nv = tree.node_count();
  DistanceMatrix d(nv);
  for (int u = 0; u < nv; ++u) {
    for (int v = u + 1; v < nv; ++v) d.set(u, v, tree.path_length(u, v));
  }
  return d;
}

DistanceMatrix pairwise_leaf_distances(const BalancedTree& tree) {
  const int n = tree.leaf_count();
  DistanceMatrix d(n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      // Balanced: both leaves are at the same depth, so d = 2 * height(lca).
      d.set(u, v, 2 * tree.height(tree.lca(tree.leaf_node(u), tree.leaf_node(v))));
    }
  }
  return d;
}

PartialMetric cap_metric(const DistanceMatrix& d, int ell) {
  if (ell < 0) throw ModelError("cap level must be non-negative");
  PartialMetric pm{ell, DistanceMatrix(d.size())};
  for (int u = 0; u < d.size(); ++u) {
    for (int v = u + 1; v < d.size(); ++v) pm.dist.set(u, v, std::min(d(u, v), pm.cap()));
  }
  return pm;
}

PartialMetric l_topology(const BalancedTree& tree, int ell) { return cap_metric(pairwise_leaf_distances(tree), ell); }

void validate_metric(const PartialMetric& pm) {
  for (int u = 0; u < pm.size(); ++u) {
    if (pm(u, u) != 0) throw ModelError("nonzero diagonal at leaf " + std::to_string(u + 1));
    for (int v = u + 1; v < pm.size(); ++v) {
      const int x = pm(u, v);
      if (x != pm(v, u) || x < 2 || x > pm.cap() || x % 2 != 0) {
        throw ModelError("invalid distance " + std::to_string(x) + " between leaves " + std::to_string(u + 1) +
                         " and " + std::to_string(v + 1));
      }
    }
  }
}

Labeling l_labeling(const PartialMetric& pm, int max_height) {
  const int n = pm.size();
  if (max_height < 0) max_height = pm.ell;
  max_height = std::min(max_height, pm.ell);
  Labeling lab;
  for (int i = 0; i <= max_height; ++i) {
    std::vector<int> owner(n, -1);
    std::vector<LeafSet> sets;
    for (int w = 0; w < n; ++w) {
      if (owner[w] >= 0) continue;
      LeafSet ball;
      for (int x = 0; x < n; ++x) {
        if (pm(w, x) <= 2 * i) ball.push_back(x);
      }
      // Every member must see exactly the same ball, otherwise the balls
      // overlap without nesting.
      for (int x : ball) {
        if (owner[x] >= 0) {
          throw LabelingError(w, x, i, "leaves " + std::to_string(w + 1) + " and " + std::to_string(x + 1) +
                                           " fall in overlapping vertex sets at height " + std::to_string(i));
        }
        for (int y = 0; y < n; ++y) {
          if ((pm(x, y) <= 2 * i) != (pm(w, y) <= 2 * i)) {
            throw LabelingError(w, x, i, "leaves " + std::to_string(w + 1) + " and " + std::to_string(x + 1) +
                                             " disagree about leaf " + std::to_string(y + 1) + " at height " +
                                             std::to_string(i));
          }
        }
        owner[x] = static_cast<int>(sets.size());
      }
      sets.push_back(std::move(ball));
    }
    if (i > 0) {
      // Each vertex must be the union of its children.
      const auto& below = lab.owner.back();
      for (int w = 0; w < n; ++w) {
        for (int x = 0; x < n; ++x) {
          if (below[w] == below[x] && owner[w] != owner[x]) {
            throw LabelingError(w, x, i, "leaves " + std::to_string(w + 1) + " and " + std::to_string(x + 1) +
                                             " separate at height " + std::to_string(i) + " after joining below");
          }
        }
      }
    }
    lab.levels.push_back(std::move(sets));
    lab.owner.push_back(std::move(owner));
    if (lab.levels.back().size() == 1) break;
  }
  return lab;
}

BalancedTree tree_from_metric(const DistanceMatrix& d) {
  const int n = d.size();
  if (n == 0) throw ModelError("empty metric");
  if (n == 1) return BalancedTree::from_parents({0}, {0});
  const int q = d.max_value() / 2;
  const Labeling lab = l_labeling(PartialMetric{q, d}, q);
  if (lab.height_count() != q + 1 || lab.levels[q].size() != 1) {
    throw ModelError("metric is not the leaf metric of a balanced tree");
  }
  // Node ids top-down; siblings in the order of their smallest leaf, which
  // is the order of levels[h].
  std::vector<int> parent{0};
  std::vector<int> id_above{0};
  for (int h = q - 1; h >= 0; --h) {
    const auto& sets = lab.levels[h];
    std::vector<std::pair<int, int>> order;  // (parent node id, set index)
    for (int s = 0; s < static_cast<int>(sets.size()); ++s) {
      order.emplace_back(id_above[lab.owner[h + 1][sets[s].front()]], s);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<int> id_here(sets.size());
    for (const auto& [p, s] : order) {
      id_here[s] = static_cast<int>(parent.size());
      parent.push_back(p);
    }
    id_above = std::move(id_here);
  }
  std::vector<int> leaf_nodes(n);
  for (int w = 0; w < n; ++w) leaf_nodes[w] = id_above[lab.owner[0][w]];
  return BalancedTree::from_parents(std::move(parent), std::move(leaf_nodes));
}

}  // namespace cfn
