#include "cfn/tree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

#include "cfn/rng.hpp"

namespace cfn {

BalancedTree BalancedTree::from_parents(std::vector<int> parent, std::vector<int> leaf_nodes) {
  const int nv = static_cast<int>(parent.size());
  if (nv == 0) throw ModelError("tree has no nodes");
  BalancedTree t;
  t.parent_ = std::move(parent);
  t.children_.assign(nv, {});
  int root = -1;
  for (int v = 0; v < nv; ++v) {
    const int p = t.parent_[v];
    if (p < 0 || p >= nv) throw ModelError("parent of node " + std::to_string(v) + " out of range");
    if (p == v) {
      if (root >= 0) throw ModelError("more than one root (nodes " + std::to_string(root) + ", " + std::to_string(v) + ")");
      root = v;
    } else {
      t.children_[p].push_back(v);
    }
  }
  if (root < 0) throw ModelError("no root: some node must be its own parent");
  t.root_ = root;

  t.level_.assign(nv, -1);
  t.level_[root] = 0;
  std::queue<int> q;
  q.push(root);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    t.bfs_.push_back(v);
    for (int c : t.children_[v]) {
      t.level_[c] = t.level_[v] + 1;
      q.push(c);
    }
  }
  if (static_cast<int>(t.bfs_.size()) != nv) throw ModelError("parent array contains a cycle or a detached node");

  t.depth_ = -1;
  int leaves = 0;
  for (int v = 0; v < nv; ++v) {
    const auto nc = t.children_[v].size();
    if (nc == 0) {
      ++leaves;
      if (t.depth_ < 0) t.depth_ = t.level_[v];
      if (t.level_[v] != t.depth_) {
        throw ModelError("tree is not balanced: leaf node " + std::to_string(v) + " at depth " +
                         std::to_string(t.level_[v]) + ", expected " + std::to_string(t.depth_));
      }
    } else if (nc < 2 && v != root) {
      throw ModelError("internal node " + std::to_string(v) + " has a single child");
    }
  }
  if (nv > 1 && t.children_[root].size() < 2) throw ModelError("root has a single child");

  if (static_cast<int>(leaf_nodes.size()) != leaves) {
    throw ModelError("leaf label list has " + std::to_string(leaf_nodes.size()) + " entries for " +
                     std::to_string(leaves) + " leaves");
  }
  t.leaf_index_.assign(nv, -1);
  for (int i = 0; i < leaves; ++i) {
    const int v = leaf_nodes[i];
    if (v < 0 || v >= nv || !t.children_[v].empty()) {
      throw ModelError("label " + std::to_string(i + 1) + " does not name a leaf");
    }
    if (t.leaf_index_[v] >= 0) throw ModelError("leaf node " + std::to_string(v) + " carries two labels");
    t.leaf_index_[v] = i;
  }
  t.leaf_nodes_ = std::move(leaf_nodes);
  return t;
}

std::vector<int> BalancedTree::leaves_below(int v) const {
  std::vector<int> out;
  std::vector<int> stack{v};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (leaf_index_[u] >= 0) out.push_back(leaf_index_[u]);
    for (int c : children_[u]) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int BalancedTree::lca(int u, int v) const {
  while (level_[u] > level_[v]) u = parent_[u];
  while (level_[v] > level_[u]) v = parent_[v];
  while (u != v) {
    u = parent_[u];
    v = parent_[v];
  }
  return u;
}

int BalancedTree::path_length(int u, int v) const {
  const int a = lca(u, v);
  return level_[u] + level_[v] - 2 * level_[a];
}

std::vector<int> BalancedTree::edges_up_to(int u, int a) const {
  std::vector<int> out;
  while (u != a) {
    out.push_back(u);
    u = parent_[u];
  }
  return out;
}

bool BalancedTree::has_min_branching(int b) const {
  for (int v = 0; v < node_count(); ++v) {
    const int nc = static_cast<int>(children_[v].size());
    if (nc == 0) continue;
    if (nc < (v == root_ ? b + 1 : b)) return false;
  }
  return true;
}

namespace {

void check_branching(int b) {
  if (b < 2) throw ModelError("branching factor must be at least 2, got " + std::to_string(b));
}

// Parent array in BFS order for a root with `root_children` children and
// every deeper internal node with b children.
BalancedTree regular_shape(int root_children, int b, int depth) {
  std::vector<int> parent{0};
  std::vector<int> frontier{0};
  for (int lev = 0; lev < depth; ++lev) {
    std::vector<int> next;
    const int nc = lev == 0 ? root_children : b;
    for (int v : frontier) {
      for (int c = 0; c < nc; ++c) {
        next.push_back(static_cast<int>(parent.size()));
        parent.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  return BalancedTree::from_parents(std::move(parent), std::move(frontier));
}

}  // namespace

BalancedTree build_bary_tree(int b, int ell) {
  check_branching(b);
  if (ell < 0) throw ModelError("level count must be non-negative");
  return regular_shape(b, b, ell);
}

BalancedTree build_regular_star_tree(int b, int q) {
  check_branching(b);
  if (q < 0) throw ModelError("level count must be non-negative");
  return regular_shape(b + 1, b, q + 1);
}

BalancedTree relabel_leaves(const BalancedTree& tree, const std::vector<int>& perm) {
  const int n = tree.leaf_count();
  if (static_cast<int>(perm.size()) != n) throw ModelError("permutation size does not match leaf count");
  std::vector<int> leaf_nodes(n, -1);
  for (int i = 0; i < n; ++i) {
    if (perm[i] < 0 || perm[i] >= n || leaf_nodes[perm[i]] >= 0) throw ModelError("not a permutation");
    leaf_nodes[perm[i]] = tree.leaf_node(i);
  }
  std::vector<int> parent(tree.node_count());
  for (int v = 0; v < tree.node_count(); ++v) parent[v] = tree.parent(v);
  return BalancedTree::from_parents(std::move(parent), std::move(leaf_nodes));
}

namespace {

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace

BalancedTree random_uniform_topology(int b, int q, std::uint64_t seed) {
  const BalancedTree shape = build_regular_star_tree(b, q);
  Rng rng(seed);
  return relabel_leaves(shape, random_permutation(shape.leaf_count(), rng));
}

BalancedTree random_branching_tree(int b, int max_children, int depth, std::uint64_t seed) {
  check_branching(b);
  if (max_children < b) throw ModelError("max_children below b");
  if (depth < 1) throw ModelError("depth must be at least 1");
  Rng rng(seed);
  std::vector<int> parent{0};
  std::vector<int> frontier{0};
  for (int lev = 0; lev < depth; ++lev) {
    std::vector<int> next;
    const int lo = lev == 0 ? b + 1 : b;
    const int span = max_children - b + 1;
    for (int v : frontier) {
      const int nc = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
      for (int c = 0; c < nc; ++c) {
        next.push_back(static_cast<int>(parent.size()));
        parent.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  const BalancedTree shape = BalancedTree::from_parents(std::move(parent), std::move(frontier));
  return relabel_leaves(shape, random_permutation(shape.leaf_count(), rng));
}

EdgeParams EdgeParams::uniform(const BalancedTree& tree, double theta, double eta) {
  EdgeParams p;
  p.theta.assign(tree.node_count(), theta);
  p.eta.assign(tree.leaf_count(), eta);
  p.validate(tree);
  return p;
}

EdgeParams EdgeParams::random_interval(const BalancedTree& tree, double lo, double hi, std::uint64_t seed,
                                       double eta) {
  if (!(lo <= hi)) throw ModelError("empty fidelity interval");
  Rng rng(seed);
  EdgeParams p;
  p.theta.assign(tree.node_count(), 1.0);
  for (int v : tree.bfs_order()) {
    if (v != tree.root()) p.theta[v] = lo + (hi - lo) * rng.uniform();
  }
  p.eta.assign(tree.leaf_count(), eta);
  p.validate(tree);
  return p;
}

double EdgeParams::effective(const BalancedTree& tree, int v) const {
  const int leaf = tree.leaf_index(v);
  return leaf >= 0 ? theta[v] * eta[leaf] : theta[v];
}

void EdgeParams::validate(const BalancedTree& tree) const {
  if (static_cast<int>(theta.size()) != tree.node_count()) {
    throw ModelError("theta has " + std::to_string(theta.size()) + " entries for " +
                     std::to_string(tree.node_count()) + " nodes");
  }
  if (static_cast<int>(eta.size()) != tree.leaf_count()) {
    throw ModelError("eta has " + std::to_string(eta.size()) + " entries for " +
                     std::to_string(tree.leaf_count()) + " leaves");
  }
  for (int v = 0; v < tree.node_count(); ++v) {
    if (v == tree.root()) continue;
    if (!(theta[v] >= 0.0 && theta[v] <= 1.0)) throw ModelError("theta of edge into node " + std::to_string(v) + " outside [0,1]");
  }
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!(eta[i] >= 0.0 && eta[i] <= 1.0)) throw ModelError("eta of leaf " + std::to_string(i + 1) + " outside [0,1]");
  }
  if (!(root_plus >= 0.0 && root_plus <= 1.0)) throw ModelError("root probability outside [0,1]");
}

}  // namespace cfn
