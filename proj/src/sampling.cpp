#include "cfn/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "cfn/rng.hpp"

namespace cfn {

SampleMatrix SampleMatrix::select_columns(const std::vector<int>& columns) const {
  std::vector<int> verts;
  verts.reserve(columns.size());
  for (int c : columns) verts.push_back(vertices_.at(c));
  SampleMatrix out(k_, std::move(verts));
  for (std::size_t t = 0; t < k_; ++t) {
    const std::int8_t* src = row(t);
    std::int8_t* dst = out.row(t);
    for (std::size_t j = 0; j < columns.size(); ++j) dst[j] = src[columns[j]];
  }
  return out;
}

SampleMatrix SampleMatrix::head(std::size_t count) const {
  if (count > k_) throw std::out_of_range("head: count exceeds sample count");
  SampleMatrix out(count, vertices_);
  std::copy(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(count * width()), out.values_.begin());
  return out;
}

namespace {

// Per-node flip probabilities (1 - theta_eff)/2; the root entry is unused.
std::vector<double> flip_probabilities(const BalancedTree& tree, const EdgeParams& params) {
  params.validate(tree);
  std::vector<double> flip(tree.node_count(), 0.0);
  for (int v = 0; v < tree.node_count(); ++v) {
    if (v != tree.root()) flip[v] = 0.5 * (1.0 - params.effective(tree, v));
  }
  return flip;
}

template <typename RowFn>
void for_each_chunk(std::size_t k, std::uint64_t seed, RowFn&& fn) {
  for (std::size_t start = 0, chunk = 0; start < k; start += kSampleChunk, ++chunk) {
    Rng rng(derive_seed(seed, chunk));
    const std::size_t stop = std::min(k, start + kSampleChunk);
    for (std::size_t t = start; t < stop; ++t) fn(t, rng);
  }
}

}  // namespace

SampleMatrix sample_cfn(const BalancedTree& tree, const EdgeParams& params, std::size_t k, std::uint64_t seed) {
  const std::vector<double> flip = flip_probabilities(tree, params);
  std::vector<int> verts(tree.node_count());
  for (int v = 0; v < tree.node_count(); ++v) verts[v] = v;
  SampleMatrix out(k, std::move(verts));
  const auto& order = tree.bfs_order();
  for_each_chunk(k, seed, [&](std::size_t t, Rng& rng) {
    std::int8_t* row = out.row(t);
    row[tree.root()] = rng.bernoulli(params.root_plus) ? 1 : -1;
    for (std::size_t i = 1; i < order.size(); ++i) {
      const int v = order[i];
      const std::int8_t up = row[tree.parent(v)];
      row[v] = rng.bernoulli(flip[v]) ? static_cast<std::int8_t>(-up) : up;
    }
  });
  return out;
}

SampleMatrix restrict_to_leaves(const BalancedTree& tree, const SampleMatrix& full) {
  if (static_cast<int>(full.width()) != tree.node_count()) {
    throw std::invalid_argument("coloring does not cover every node of the tree");
  }
  std::vector<int> leaves(tree.leaf_count());
  for (int i = 0; i < tree.leaf_count(); ++i) leaves[i] = i;
  SampleMatrix out(full.k(), std::move(leaves));
  for (std::size_t t = 0; t < full.k(); ++t) {
    for (int i = 0; i < tree.leaf_count(); ++i) out.set(t, i, full.at(t, tree.leaf_node(i)));
  }
  return out;
}

SampleMatrix sample_cfn_leaves(const BalancedTree& tree, const EdgeParams& params, std::size_t k,
                               std::uint64_t seed) {
  const std::vector<double> flip = flip_probabilities(tree, params);
  std::vector<int> leaves(tree.leaf_count());
  for (int i = 0; i < tree.leaf_count(); ++i) leaves[i] = i;
  SampleMatrix out(k, std::move(leaves));
  std::vector<std::int8_t> color(tree.node_count());
  const auto& order = tree.bfs_order();
  for_each_chunk(k, seed, [&](std::size_t t, Rng& rng) {
    color[tree.root()] = rng.bernoulli(params.root_plus) ? 1 : -1;
    for (std::size_t i = 1; i < order.size(); ++i) {
      const int v = order[i];
      const std::int8_t up = color[tree.parent(v)];
      color[v] = rng.bernoulli(flip[v]) ? static_cast<std::int8_t>(-up) : up;
    }
    std::int8_t* row = out.row(t);
    for (int i = 0; i < tree.leaf_count(); ++i) row[i] = color[tree.leaf_node(i)];
  });
  return out;
}

SampleMatrix sample_random_cluster(const BalancedTree& tree, const EdgeParams& params, std::size_t k,
                                   std::uint64_t seed) {
  params.validate(tree);
  std::vector<double> open(tree.node_count(), 1.0);
  for (int v = 0; v < tree.node_count(); ++v) {
    if (v != tree.root()) open[v] = params.effective(tree, v);
  }
  std::vector<int> leaves(tree.leaf_count());
  for (int i = 0; i < tree.leaf_count(); ++i) leaves[i] = i;
  SampleMatrix out(k, std::move(leaves));
  std::vector<std::int8_t> color(tree.node_count());
  const auto& order = tree.bfs_order();
  for_each_chunk(k, seed, [&](std::size_t t, Rng& rng) {
    color[tree.root()] = rng.bernoulli(params.root_plus) ? 1 : -1;
    // A closed edge starts a new cluster, which gets a fresh fair color.
    for (std::size_t i = 1; i < order.size(); ++i) {
      const int v = order[i];
      color[v] = rng.bernoulli(open[v]) ? color[tree.parent(v)] : static_cast<std::int8_t>(rng.coin());
    }
    std::int8_t* row = out.row(t);
    for (int i = 0; i < tree.leaf_count(); ++i) row[i] = color[tree.leaf_node(i)];
  });
  return out;
}

std::vector<double> exact_leaf_distribution(const BalancedTree& tree, const EdgeParams& params) {
  const std::vector<double> flip = flip_probabilities(tree, params);
  const int n = tree.leaf_count();
  if (n > 24) throw std::invalid_argument("exact leaf distribution limited to 24 leaves");
  const auto& order = tree.bfs_order();
  std::vector<double> dist(std::size_t{1} << n);
  std::vector<double> lp(tree.node_count()), lm(tree.node_count());
  for (std::size_t x = 0; x < dist.size(); ++x) {
    // Upward pass: lp/lm = likelihood of the leaves below v given v = +1/-1.
    for (std::size_t i = order.size(); i-- > 0;) {
      const int v = order[i];
      const int leaf = tree.leaf_index(v);
      if (leaf >= 0) {
        const bool plus = (x >> leaf) & 1;
        lp[v] = plus ? 1.0 : 0.0;
        lm[v] = plus ? 0.0 : 1.0;
        continue;
      }
      double p = 1.0, m = 1.0;
      for (int c : tree.children(v)) {
        const double f = flip[c];
        p *= (1 - f) * lp[c] + f * lm[c];
        m *= f * lp[c] + (1 - f) * lm[c];
      }
      lp[v] = p;
      lm[v] = m;
    }
    dist[x] = params.root_plus * lp[tree.root()] + (1 - params.root_plus) * lm[tree.root()];
  }
  return dist;
}

std::vector<double> exact_cluster_leaf_distribution(const BalancedTree& tree, const EdgeParams& params) {
  params.validate(tree);
  const int n = tree.leaf_count();
  const auto& order = tree.bfs_order();
  std::vector<int> edges(order.begin() + 1, order.end());
  const int ne = static_cast<int>(edges.size());
  if (ne > 24 || n > 24) throw std::invalid_argument("cluster enumeration limited to 24 edges");
  std::vector<double> open(tree.node_count(), 1.0);
  for (int v : edges) open[v] = params.effective(tree, v);

  std::vector<double> dist(std::size_t{1} << n, 0.0);
  std::vector<int> cluster(tree.node_count());
  std::vector<int> leaf_cluster(n);
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << ne); ++pattern) {
    double w = 1.0;
    int clusters = 1;
    cluster[tree.root()] = 0;
    for (int e = 0; e < ne; ++e) {
      const int v = edges[e];
      if ((pattern >> e) & 1) {
        w *= open[v];
        cluster[v] = cluster[tree.parent(v)];
      } else {
        w *= 1.0 - open[v];
        cluster[v] = clusters++;
      }
    }
    if (w == 0.0) continue;
    // Compact the clusters that reach a leaf; cluster 0 keeps the root color.
    std::vector<int> remap(clusters, -1);
    remap[0] = 0;
    int used = 1;
    for (int i = 0; i < n; ++i) {
      int& r = remap[cluster[tree.leaf_node(i)]];
      if (r < 0) r = used++;
      leaf_cluster[i] = r;
    }
    for (std::uint64_t colors = 0; colors < (std::uint64_t{1} << used); ++colors) {
      double p = w;
      p *= (colors & 1) ? params.root_plus : 1.0 - params.root_plus;
      p *= std::ldexp(1.0, -(used - 1));
      std::size_t x = 0;
      for (int i = 0; i < n; ++i) {
        if ((colors >> leaf_cluster[i]) & 1) x |= std::size_t{1} << i;
      }
      dist[x] += p;
    }
  }
  return dist;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions on different index sets");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace cfn
