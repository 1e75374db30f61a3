#include "cfn/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "cfn/error.hpp"
#include "cfn/majority.hpp"
#include "cfn/rng.hpp"

namespace cfn {

ReconstructionConfig ReconstructionConfig::fixed(int b, double theta, std::uint64_t seed) {
  ReconstructionConfig c;
  c.regime = Regime::kFixed;
  c.b = b;
  c.theta_min = c.theta_max = theta;
  c.ell = choose_level(b, theta, 1.0);
  c.g = 1.0;
  c.seed = seed;
  c.beta = estimate_beta(b, c.ell, theta, default_eta_grid()).beta;
  c.validate();
  return c;
}

ReconstructionConfig ReconstructionConfig::general(int b, double theta_min, double theta_max, double g,
                                                   std::uint64_t seed) {
  ReconstructionConfig c;
  c.regime = Regime::kGeneral;
  c.b = b;
  c.theta_min = theta_min;
  c.theta_max = theta_max;
  c.g = g;
  c.seed = seed;
  c.validate();
  c.ell = choose_level(b, theta_min, g);
  c.beta = estimate_beta(b, c.ell, theta_min, default_eta_grid(), 0.9, g).beta;
  return c;
}

void ReconstructionConfig::validate() const {
  if (b < 2) throw std::invalid_argument("config: b must be at least 2");
  if (ell < 1) throw std::invalid_argument("config: ell must be at least 1");
  if (!(theta_min > 0 && theta_min <= theta_max && theta_max < 1)) {
    throw std::invalid_argument("config: need 0 < theta_min <= theta_max < 1");
  }
  if (!(leaf_eta > 0 && leaf_eta <= 1)) throw std::invalid_argument("config: leaf_eta must be in (0,1]");
  if (regime == Regime::kFixed && theta_min != theta_max) {
    throw std::invalid_argument("config: the fixed regime needs theta_min == theta_max");
  }
  if (regime == Regime::kGeneral) {
    if (!(g > 0 && g <= 1)) throw std::invalid_argument("config: g must be in (0,1]");
    const double lhs = b * theta_min * theta_min, rhs = g * g;
    if (std::abs(lhs - rhs) <= 1e-12 * rhs) {
      throw std::invalid_argument("config: b theta_min^2 = g^2 lies on the boundary and is rejected");
    }
    if (lhs < rhs) throw std::invalid_argument("config: need b theta_min^2 > g^2");
    if (beta != 0 && !(beta > 0 && beta <= 1)) throw std::invalid_argument("config: beta must be in (0,1]");
  }
}

std::vector<std::vector<int>> descendant_sets(const Labeling& lab, int level, int ell, int b) {
  if (level - ell < 0 || level >= lab.height_count()) throw std::invalid_argument("descendant_sets: bad level");
  // children[h][s]: positions in levels[h-1] of the children of levels[h][s],
  // in order of smallest leaf.
  std::vector<std::vector<std::vector<int>>> children(level + 1);
  for (int h = level - ell + 1; h <= level; ++h) {
    children[h].assign(lab.levels[h].size(), {});
    for (int c = 0; c < static_cast<int>(lab.levels[h - 1].size()); ++c) {
      children[h][lab.owner[h][lab.levels[h - 1][c].front()]].push_back(c);
    }
  }
  std::vector<std::vector<int>> out(lab.levels[level].size());
  for (int j = 0; j < static_cast<int>(out.size()); ++j) {
    std::vector<int> frontier{j};
    for (int h = level; h > level - ell; --h) {
      std::vector<int> next;
      for (int s : frontier) {
        const auto& ch = children[h][s];
        if (static_cast<int>(ch.size()) < b) {
          throw ModelError("vertex with leaf " + std::to_string(lab.levels[h][s].front() + 1) + " at height " +
                           std::to_string(h) + " has " + std::to_string(ch.size()) + " children, fewer than " +
                           std::to_string(b));
        }
        next.insert(next.end(), ch.begin(), ch.begin() + b);
      }
      frontier = std::move(next);
    }
    out[j] = std::move(frontier);
  }
  return out;
}

namespace {

SampleMatrix lift_samples(const SampleMatrix& in, const std::vector<std::vector<int>>& groups,
                          const std::vector<int>& keys, int stage, std::uint64_t seed) {
  SampleMatrix out(in.k(), keys);
  for (std::size_t t = 0; t < in.k(); ++t) {
    const std::int8_t* row = in.row(t);
    std::int8_t* dst = out.row(t);
    const std::uint64_t row_seed = derive_seed(seed, static_cast<std::uint64_t>(stage), t);
    for (std::size_t j = 0; j < groups.size(); ++j) {
      int s = 0;
      for (int x : groups[j]) s += row[x];
      if (s == 0) s = (mix64(row_seed ^ mix64(static_cast<std::uint64_t>(keys[j]))) >> 63) ? 1 : -1;
      dst[j] = s > 0 ? 1 : -1;
    }
  }
  return out;
}

std::vector<int> smallest_leaves(const std::vector<LeafSet>& sets) {
  std::vector<int> keys;
  keys.reserve(sets.size());
  for (const auto& s : sets) keys.push_back(s.front());
  return keys;
}

}  // namespace

PseudoLeafColoring psi_lift(const PseudoLeafColoring& in, const PartialMetric& pm, int b, int ell,
                            std::uint64_t seed) {
  const int level = in.level + ell;
  if (pm.ell != level) throw std::invalid_argument("psi_lift: metric cap level must equal the new level");
  const Labeling lab = l_labeling(pm);
  if (lab.height_count() <= level) throw ModelError("psi_lift: no vertices at height " + std::to_string(level));
  if (lab.levels[in.level] != in.labels) throw ModelError("psi_lift: coloring labels do not match the metric");
  const auto groups = descendant_sets(lab, level, ell, b);
  PseudoLeafColoring out;
  out.level = level;
  out.labels = lab.levels[level];
  out.values = lift_samples(in.values, groups, smallest_leaves(out.labels), level / ell, seed);
  return out;
}

PartialMetric merge_metrics(const PartialMetric& pm_inner, const PartialMetric& d_prime, const Labeling& lab) {
  const int base = pm_inner.ell;
  if (lab.height_count() <= base) throw std::invalid_argument("merge_metrics: labeling lacks the inner level");
  const auto& owner = lab.owner[base];
  if (d_prime.size() != static_cast<int>(lab.levels[base].size())) {
    throw std::invalid_argument("merge_metrics: d' does not match the number of vertices at the inner level");
  }
  const int n = pm_inner.size();
  PartialMetric out{base + d_prime.ell, DistanceMatrix(n)};
  for (int u = 0; u < n; ++u) {
    if (owner[u] < 0) throw std::invalid_argument("merge_metrics: leaf " + std::to_string(u + 1) + " not covered");
    for (int v = u + 1; v < n; ++v) {
      const int inner = pm_inner(u, v);
      out.dist.set(u, v, inner <= 2 * base ? inner : d_prime(owner[u], owner[v]) + 2 * base);
    }
  }
  return out;
}

namespace {

class SampleSource final : public CorrelationSource {
 public:
  SampleSource(const SampleMatrix& leaves, std::uint64_t seed) : values_(leaves), seed_(seed) {}
  CorrelationTable correlations() const override { return cfn::correlations(values_); }
  void lift(const std::vector<std::vector<int>>& groups, const std::vector<int>& keys, int stage) override {
    values_ = lift_samples(values_, groups, keys, stage, seed_);
  }
  bool exact() const override { return false; }

 private:
  SampleMatrix values_;
  std::uint64_t seed_;
};

class ExactSource final : public CorrelationSource {
 public:
  ExactSource(const BalancedTree& tree, const EdgeParams& params) : tree_(tree), params_(params) {
    params_.validate(tree_);
    for (int i = 0; i < tree_.leaf_count(); ++i) {
      nodes_.push_back(tree_.leaf_node(i));
      gains_.push_back(params_.eta[i]);
    }
  }

  CorrelationTable correlations() const override {
    const int m = static_cast<int>(nodes_.size());
    CorrelationTable c(m, 0);
    for (int x = 0; x < m; ++x) {
      for (int y = x + 1; y < m; ++y) {
        const int a = tree_.lca(nodes_[x], nodes_[y]);
        double p = gains_[x] * gains_[y];
        for (int e : tree_.edges_up_to(nodes_[x], a)) p *= params_.theta[e];
        for (int e : tree_.edges_up_to(nodes_[y], a)) p *= params_.theta[e];
        c.set(x, y, p);
      }
    }
    return c;
  }

  void lift(const std::vector<std::vector<int>>& groups, const std::vector<int>&, int) override {
    std::vector<int> nodes;
    std::vector<double> gains;
    for (const auto& g : groups) {
      int top = nodes_[g.front()];
      for (int x : g) top = tree_.lca(top, nodes_[x]);
      // The gadget: every path from a voter up to `top`.
      std::map<int, int> local{{top, 0}};
      std::vector<int> parent{0};
      std::vector<double> theta{1.0};
      std::vector<int> leaf_nodes;
      std::vector<double> eta;
      for (int x : g) {
        std::vector<int> path;
        for (int v = nodes_[x]; v != top; v = tree_.parent(v)) path.push_back(v);
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
          if (local.count(*it)) continue;
          const int id = static_cast<int>(parent.size());
          local[*it] = id;
          parent.push_back(local.at(tree_.parent(*it)));
          theta.push_back(params_.theta[*it]);
        }
        leaf_nodes.push_back(local.at(nodes_[x]));
        eta.push_back(gains_[x]);
      }
      const BalancedTree gadget = BalancedTree::from_parents(parent, leaf_nodes);
      EdgeParams p;
      p.theta = std::move(theta);
      p.eta = std::move(eta);
      nodes.push_back(top);
      gains.push_back(exact_maj_gain(gadget, p));
    }
    nodes_ = std::move(nodes);
    gains_ = std::move(gains);
  }

  bool exact() const override { return true; }

 private:
  BalancedTree tree_;
  EdgeParams params_;
  std::vector<int> nodes_;
  std::vector<double> gains_;
};

}  // namespace

std::unique_ptr<CorrelationSource> sample_source(const SampleMatrix& leaves, std::uint64_t seed) {
  return std::make_unique<SampleSource>(leaves, seed);
}

std::unique_ptr<CorrelationSource> exact_source(const BalancedTree& tree, const EdgeParams& params) {
  return std::make_unique<ExactSource>(tree, params);
}

std::vector<double> fixed_stage_gains(const ReconstructionConfig& config, int stages) {
  std::vector<double> m{config.leaf_eta};
  for (int i = 1; i < stages; ++i) m.push_back(homogeneous_gain(config.b, config.ell, config.theta_min, m.back()));
  return m;
}

ReconstructionResult reconstruct(CorrelationSource& source, int n, const ReconstructionConfig& config) {
  config.validate();
  if (config.regime == Regime::kGeneral && !(config.beta > 0)) {
    throw std::invalid_argument("config: the general regime needs beta > 0");
  }
  const FailureKind kind = source.exact() ? FailureKind::kInconsistentInput : FailureKind::kInsufficientSamples;
  const int ell = config.ell;
  ReconstructionResult res;
  PartialMetric pm{0, DistanceMatrix(n, 2)};
  double gain = config.leaf_eta;

  for (int stage = 0; n > 1 && !pm.is_complete(); ++stage) {
    if (stage > n) throw ReconstructionError("stage count exceeded the leaf count", stage, -1, -1, kind);
    Labeling lab;
    try {
      lab = l_labeling(pm);
    } catch (const LabelingError& e) {
      throw ReconstructionError(std::string("stage ") + std::to_string(stage) + ": " + e.what(), stage, e.u(),
                                e.v(), kind);
    }
    const int level = stage * ell;
    if (stage > 0) {
      std::vector<std::vector<int>> groups;
      try {
        groups = descendant_sets(lab, level, ell, config.b);
      } catch (const ModelError& e) {
        throw ReconstructionError(std::string("stage ") + std::to_string(stage) + ": " + e.what(), stage, -1, -1,
                                  kind);
      }
      source.lift(groups, smallest_leaves(lab.levels[level]), stage);
      if (config.regime == Regime::kFixed) gain = homogeneous_gain(config.b, ell, config.theta_min, gain);
    }
    const auto& labels = lab.levels[level];
    const int m = static_cast<int>(labels.size());
    const CorrelationTable c = source.correlations();

    StageDiagnostic diag;
    diag.stage = stage;
    diag.level = level;
    diag.pseudo_leaves = m;
    PartialMetric d_prime{ell, DistanceMatrix(m)};
    if (config.regime == Regime::kFixed) {
      diag.eta = gain;
      const FixedThetaClassifier classify(config.theta_min, gain, ell);
      for (int x = 0; x < m; ++x) {
        for (int y = x + 1; y < m; ++y) d_prime.dist.set(x, y, classify.classify(c(x, y)));
      }
    } else {
      diag.eta = stage == 0 ? config.leaf_eta : std::min(1.0, std::pow(config.g, level)) * config.beta;
      try {
        FourPointResult fp = recover_l_topology(c, config.theta_min, config.theta_max, diag.eta, ell, config.four_point);
        d_prime = std::move(fp.metric);
        diag.four_point = std::move(fp.diagnostics);
      } catch (const ReconstructionError& e) {
        const int u = e.u() >= 0 ? labels[e.u()].front() : -1, v = e.v() >= 0 ? labels[e.v()].front() : -1;
        throw ReconstructionError(std::string("stage ") + std::to_string(stage) + ": " + e.what(), stage, u, v,
                                  kind);
      }
    }
    PartialMetric next = merge_metrics(pm, d_prime, lab);
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) diag.pairs_resolved += pm(u, v) > 2 * level && next(u, v) < next.cap();
    }
    pm = std::move(next);
    res.stages.push_back(std::move(diag));
  }

  if (n > 1) {
    try {
      (void)tree_from_metric(pm.dist);
    } catch (const ModelError& e) {
      int u = -1, v = -1;
      if (const auto* le = dynamic_cast<const LabelingError*>(&e)) {
        u = le->u();
        v = le->v();
      }
      throw ReconstructionError(std::string("final metric: ") + e.what(), static_cast<int>(res.stages.size()), u, v,
                                kind);
    }
  }
  res.metric = pm.dist;
  return res;
}

ReconstructionResult reconstruct_fixed(const SampleMatrix& leaves, const ReconstructionConfig& config) {
  if (config.regime != Regime::kFixed) throw std::invalid_argument("reconstruct_fixed needs a fixed-regime config");
  auto src = sample_source(leaves, config.seed);
  return reconstruct(*src, static_cast<int>(leaves.width()), config);
}

ReconstructionResult reconstruct_general(const SampleMatrix& leaves, const ReconstructionConfig& config) {
  if (config.regime != Regime::kGeneral) {
    throw std::invalid_argument("reconstruct_general needs a general-regime config");
  }
  auto src = sample_source(leaves, config.seed);
  return reconstruct(*src, static_cast<int>(leaves.width()), config);
}

double sample_complexity(int n, double delta, const ReconstructionConfig& config, double c_hat) {
  if (n < 2 || !(delta > 0 && delta < 1) || !(c_hat > 0)) {
    throw std::invalid_argument("sample_complexity: need n >= 2, 0 < delta < 1, c_hat > 0");
  }
  double k = (2 * std::log(n) + std::log(2.0) - std::log(delta)) / c_hat;
  if (config.g < 1) {
    const double q = std::log(static_cast<double>(n)) / std::log(static_cast<double>(config.b));
    k *= std::pow(config.g, -8 * q);
  }
  return k;
}

double theoretical_c_fixed(double eta0, double theta, int ell) {
  const double s = 1 - theta * theta;
  return std::pow(eta0, 4) * std::pow(theta, 4 * ell) * s * s / 8;
}

double theoretical_c_general(double theta_min, double theta_max, double beta, int ell) {
  const double s = 1 - theta_max;
  return std::pow(theta_min, 8 * ell + 8) * std::pow(beta, 8) * s * s / 2048;
}

DistanceMatrix reconstruct_linkage(const CorrelationTable& table, int b, int depth) {
  const int n = table.size();
  if (b < 2 || depth < 1) throw std::invalid_argument("linkage needs b >= 2 and depth >= 1");
  std::vector<std::vector<int>> clusters;
  for (int u = 0; u < n; ++u) clusters.push_back({u});
  DistanceMatrix out(n, 2 * depth);

  auto linkage = [&](const std::vector<int>& x, const std::vector<int>& y) {
    double s = 0;
    for (int u : x)
      for (int v : y) s += table(u, v);
    return s / static_cast<double>(x.size() * y.size());
  };

  for (int level = 1; level < depth; ++level) {
    if (clusters.size() % b != 0) throw std::invalid_argument("leaf count does not match the shape");
    const int m = static_cast<int>(clusters.size());
    std::vector<double> link(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) link[i * m + j] = link[j * m + i] = linkage(clusters[i], clusters[j]);

    std::vector<bool> used(m, false);
    std::vector<std::vector<int>> next;
    for (int formed = 0; formed < m / b; ++formed) {
      int bi = -1, bj = -1;
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
          if (!used[i] && !used[j] && (bi < 0 || link[i * m + j] > link[bi * m + bj])) bi = i, bj = j;
      std::vector<int> group{bi, bj};
      used[bi] = used[bj] = true;
      while (static_cast<int>(group.size()) < b) {
        int best = -1;
        double best_score = 0;
        for (int c = 0; c < m; ++c) {
          if (used[c]) continue;
          double score = 0;
          for (int g : group) score += link[c * m + g];
          if (best < 0 || score > best_score) best = c, best_score = score;
        }
        group.push_back(best);
        used[best] = true;
      }
      std::vector<int> merged;
      for (std::size_t x = 0; x < group.size(); ++x) {
        for (std::size_t y = x + 1; y < group.size(); ++y)
          for (int u : clusters[group[x]])
            for (int v : clusters[group[y]]) out.set(u, v, 2 * level);
        merged.insert(merged.end(), clusters[group[x]].begin(), clusters[group[x]].end());
      }
      next.push_back(std::move(merged));
    }
    clusters = std::move(next);
  }
  return out;
}

std::string stage_log_jsonl(const ReconstructionResult& result) {
  std::string out;
  char buf[512];
  for (const auto& s : result.stages) {
    std::snprintf(buf, sizeof buf,
                  "{\"stage\":%d,\"level\":%d,\"pseudo_leaves\":%d,\"eta\":%.17g,\"pairs_resolved\":%d,"
                  "\"quartets\":%zu,\"margin_violations\":%zu,\"orientation_disagreements\":%zu,"
                  "\"largest_neighborhood\":%d}\n",
                  s.stage, s.level, s.pseudo_leaves, s.eta, s.pairs_resolved, s.four_point.quartets_evaluated,
                  s.four_point.margin_violations, s.four_point.orientation_disagreements,
                  s.four_point.largest_neighborhood);
    out += buf;
  }
  return out;
}

}  // namespace cfn
