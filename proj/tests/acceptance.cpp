// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Each criterion also enforces its runtime budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "cfn/distance.hpp"
#include "cfn/error.hpp"
#include "cfn/four_point.hpp"
#include "cfn/harness.hpp"
#include "cfn/info.hpp"
#include "cfn/majority.hpp"
#include "cfn/metric.hpp"
#include "cfn/reconstruct.hpp"
#include "cfn/rng.hpp"
#include "cfn/sampling.hpp"
#include "shapes.hpp"

using namespace cfn;

namespace {

constexpr std::uint64_t kSeed = 20261015;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > budget_s) {
    v.pass = false;
    v.detail += " [over budget]";
  }
  std::printf("%s criterion %d (%s): %s (%.1f s of %.0f s)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(),
              secs, budget_s);
  std::fflush(stdout);
  failures += !v.pass;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Verdict majority_covariance() {
  double worst = 0;
  for (int d = 1; d <= 10; ++d)
    for (int i = 0; i <= 10; ++i) {
      const double theta = i / 10.0;
      worst = std::max(worst, std::abs(maj_covariance_enumeration(theta, d) - theta * a_over_d(d)));
    }
  return {worst <= 1e-12, fmt("max |enumeration - theta a(d)/d| = %.2e over d=1..10, 11 theta", worst)};
}

Verdict signed_sum() {
  Rng rng(derive_seed(kSeed, 2));
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int d = 1 + static_cast<int>(rng.below(12));
    std::vector<double> y(d - 1);
    double m = 0;
    for (double& v : y) {
      v = (2 * rng.uniform() - 1) * (1 + 4 * rng.uniform());
      m = std::max(m, std::abs(v));
    }
    // Half the instances sit exactly on x = max|y|. With no y terms the
    // sign needs x > 0.
    if (y.empty()) m = 0.5 + rng.uniform();
    const double x = (i % 2 == 0) ? m : m + 3 * rng.uniform();
    bad += !signed_sum_lower_bound_check(x, y);
  }
  return {bad == 0, fmt("%d of 1000 instances below a(d)/d", bad)};
}

Verdict cluster_equivalence() {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  Rng rng(derive_seed(kSeed, 3));
  double worst = 0;
  int trees = 0, cases = 0;
  for (const auto& shape : testing::all_shapes(8)) {
    const BalancedTree tree = testing::to_tree(shape);
    ++trees;
    for (double theta : grid) {
      EdgeParams uniform = EdgeParams::uniform(tree, theta);
      worst = std::max(worst, total_variation(exact_leaf_distribution(tree, uniform), exact_cluster_leaf_distribution(tree, uniform)));
      // Mixed assignment from the same grid, including the leaf attenuations.
      EdgeParams mixed = uniform;
      for (double& t : mixed.theta) t = grid[rng.below(grid.size())];
      for (double& e : mixed.eta) e = grid[rng.below(grid.size())];
      mixed.root_plus = 0.3;
      worst = std::max(worst, total_variation(exact_leaf_distribution(tree, mixed), exact_cluster_leaf_distribution(tree, mixed)));
      cases += 2;
    }
  }
  return {worst < 1e-12, fmt("%d shapes with <= 8 leaves, %d parameter sets, max TV %.2e", trees, cases, worst)};
}

Verdict mi_decay() {
  int checks = 0, violations = 0, monotone_breaks = 0;
  for (int b = 2; b <= 16; ++b) {
    for (int i = 0; i < 20; ++i) {
      const double theta = i / 19.0;
      double prev = INFINITY;
      for (int q = 1; std::pow(b, q) <= 16; ++q) {
        const MiBoundCheck m = mi_root_boundary_check(b, q, theta);
        ++checks;
        violations += !m.pass;
        if (b * theta * theta < 1 && m.mi > prev + 1e-12) ++monotone_breaks;
        prev = m.mi;
      }
    }
  }
  return {violations == 0 && monotone_breaks == 0,
          fmt("%d (b,q,theta) checks, %d bound violations, %d increases in q below the threshold", checks, violations,
              monotone_breaks)};
}

Verdict topology_counting() {
  std::string detail;
  bool ok = true;
  for (auto [b, ell] : {std::pair{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}}) {
    const BigInt formula = n_topologies(b, ell);
    const std::int64_t count = enumerate_topologies(b, ell);
    ok &= formula == count;
    detail += fmt("b=%d l=%d: %s/%lld  ", b, ell, formula.str().c_str(), static_cast<long long>(count));
  }
  ok &= n_topologies(2, 1) == 1 && n_topologies(2, 2) == 3 && n_topologies(2, 3) == 315;
  const double lhs = log_big(n_topologies(2, 8));
  const double rhs = std::pow(2.0, 7) * std::log(std::pow(2.0, 8));
  ok &= lhs >= rhs;
  detail += fmt("ln n_top(8) = %.2f >= %.2f", lhs, rhs);
  return {ok, detail};
}

Verdict fano() {
  Rng rng(derive_seed(kSeed, 6));
  int bad = 0;
  double worst = -1;
  for (int i = 0; i < 1000; ++i) {
    const int m = 2 + static_cast<int>(rng.below(5));
    const int ny = 2 + static_cast<int>(rng.below(5));
    const ExactDistribution j = random_joint(m, ny, rng);
    const double h = std::clamp(conditional_entropy(j), 0.0, std::log2(m));
    const double gap = map_success(j) - fano_max_success(h, m);
    worst = std::max(worst, gap);
    bad += gap > 1e-9;
  }
  return {bad == 0, fmt("1000 joints, %d violations, max (MAP - Fano bound) = %.3g", bad, worst)};
}

Verdict oracle_soundness() {
  int runs = 0, wrong = 0;
  std::string first_error;
  auto attempt = [&](const BalancedTree& tree, const EdgeParams& params, const ReconstructionConfig& cfg) {
    ++runs;
    try {
      auto source = exact_source(tree, params);
      if (reconstruct(*source, tree.leaf_count(), cfg).metric != pairwise_leaf_distances(tree)) ++wrong;
    } catch (const std::exception& e) {
      ++wrong;
      if (first_error.empty()) first_error = e.what();
    }
  };
  struct Family {
    int b;
    double lo, hi;
  };
  for (Family f : {Family{2, 0.85, 0.85}, Family{2, 0.8, 0.9}, Family{3, 0.7, 0.7}, Family{3, 0.65, 0.8}}) {
    const bool homogeneous = f.lo == f.hi;
    ReconstructionConfig fixed = homogeneous ? ReconstructionConfig::fixed(f.b, f.lo) : ReconstructionConfig{};
    const ReconstructionConfig general = ReconstructionConfig::general(f.b, f.lo, f.hi);
    for (int t = 0; t < 12; ++t) {
      std::vector<BalancedTree> trees;
      for (int q = 1; leaf_count(f.b, q) <= 64; ++q) trees.push_back(random_uniform_topology(f.b, q, derive_seed(kSeed, 7, t * 10 + q)));
      // Smallest tree of each depth has (b+1) b^(depth-1) leaves.
      for (int depth = 2; leaf_count(f.b, depth - 1) <= 64; ++depth) {
        for (std::uint64_t s = 0;; ++s) {
          BalancedTree tr = random_branching_tree(f.b, f.b + 1, depth, derive_seed(kSeed, 8, t * 1000 + depth * 100 + s));
          if (tr.leaf_count() <= 64) {
            trees.push_back(std::move(tr));
            break;
          }
        }
      }
      for (const auto& tree : trees) {
        const EdgeParams params = homogeneous ? EdgeParams::uniform(tree, f.lo)
                                              : EdgeParams::random_interval(tree, f.lo, f.hi, derive_seed(kSeed, 9, runs));
        if (homogeneous) attempt(tree, params, fixed);
        attempt(tree, params, general);
      }
    }
  }
  std::string detail = fmt("%d reconstructions from exact correlations (b=2,3; n<=64), %d wrong", runs, wrong);
  if (!first_error.empty()) detail += "; first error: " + first_error;
  return {wrong == 0, detail};
}

Verdict supercritical_scaling() {
  ExperimentConfig c;
  c.kind = "sweep";
  c.b = 2;
  c.q = {2, 3, 4, 5};
  c.theta_lo = c.theta_hi = 0.85;
  c.method = Method::kFixed;
  c.trials = 100;
  c.seed = kSeed;
  c.target = 0.9;
  c.k = {500, 600, 700, 800, 900, 1000, 1200, 1400, 1600, 1800, 2000, 2300, 2600, 3000,
         3500, 4000, 4500, 5000, 6000, 7000, 8000, 10000, 12000, 15000, 20000};
  const SweepReport r = run_sweep(c);
  std::vector<double> n, log_n, k;
  std::string detail = "k*(n):";
  for (const auto& row : r.k_star) {
    if (!row.interpolated) return {false, fmt("q=%d never reached the target", row.q)};
    n.push_back(row.n);
    log_n.push_back(std::log(row.n));
    k.push_back(*row.interpolated);
    detail += fmt(" %d->%.0f (grid %zu)", row.n, *row.interpolated, *row.k);
  }
  const LinearFit fit = fit_linear(log_n, k);
  const bool nondecreasing = std::is_sorted(k.begin(), k.end());
  const bool sublinear = k.back() / k.front() < n.back() / n.front();
  detail += fmt("; fit %.0f + %.0f ln n, R^2 %.3f; empirical points concave: %s", fit.intercept, fit.slope, fit.r2,
                is_concave(n, k) ? "yes" : "no");
  // A + B ln n with B > 0 is concave and increasing in n.
  return {fit.r2 >= 0.9 && fit.slope > 0 && nondecreasing && sublinear, detail};
}

Verdict subcritical_degradation() {
  ExperimentConfig c;
  c.kind = "sweep";
  c.b = 2;
  c.q = {2, 3, 4, 5};
  c.theta_lo = c.theta_hi = 0.55;
  c.method = Method::kLinkage;
  c.trials = 100;
  c.seed = kSeed;
  c.k = {300};
  const SweepReport r = run_sweep(c);
  std::string detail = "linkage success:";
  for (const auto& p : r.points) detail += fmt(" q=%d %d/100 [%.2f,%.2f]", p.q, p.successes, p.ci_lo, p.ci_hi);
  const PointReport& q2 = r.points.front();
  const PointReport& q5 = r.points.back();
  bool ok = q5.rate < q2.rate && q5.ci_hi < q2.ci_lo && q5.rate < 0.5;

  int nonvacuous = 0, exceed = 0;
  for (const auto& p : r.points)
    for (int ell = 1; ell < p.q; ++ell) {
      const double bound = lower_bound_delta(2, 0.55, p.q, 300, ell).value;
      if (!(bound < 1)) continue;
      ++nonvacuous;
      const double sigma = std::sqrt(bound * (1 - bound) / p.trials);
      exceed += p.rate > bound + 3 * sigma;
    }
  ok &= exceed == 0;
  detail += fmt("; success bound nonvacuous at %d (q,l) points, exceeded at %d", nonvacuous, exceed);

  // The staged four-point pipeline on the same trees, for reference only.
  ExperimentConfig g = c;
  g.method = Method::kGeneral;
  g.g = 0.6;
  g.q = {2};
  const SweepReport rg = run_sweep(g);
  detail += fmt("; staged pipeline (g=0.6) at q=2: %d/100", rg.points.front().successes);
  return {ok, detail};
}

BalancedTree four_binary_subtrees(std::uint64_t seed) {
  // Root with four children, each a 4-level binary tree: 64 leaves.
  std::vector<int> parent{0}, leaves;
  std::function<void(int, int)> grow = [&](int node, int levels) {
    if (levels == 0) {
      leaves.push_back(node);
      return;
    }
    for (int c = 0; c < 2; ++c) {
      parent.push_back(node);
      grow(static_cast<int>(parent.size()) - 1, levels - 1);
    }
  };
  for (int c = 0; c < 4; ++c) {
    parent.push_back(0);
    grow(static_cast<int>(parent.size()) - 1, 4);
  }
  const BalancedTree base = BalancedTree::from_parents(parent, leaves);
  std::vector<int> perm(64);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = 63; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  return relabel_leaves(base, perm);
}

Verdict four_point_recovery() {
  constexpr int kTrials = 100, kEll = 2;
  constexpr std::size_t kSamples = 5000;
  int recovered = 0;
  for (int t = 0; t < kTrials; ++t) {
    const BalancedTree tree = four_binary_subtrees(derive_seed(kSeed, 10, t));
    const EdgeParams params = EdgeParams::random_interval(tree, 0.8, 0.9, derive_seed(kSeed, 11, t));
    const SampleMatrix s = sample_cfn_leaves(tree, params, kSamples, derive_seed(kSeed, 12, t));
    try {
      recovered += recover_l_topology(s, 0.8, 0.9, 1.0, kEll).metric == l_topology(tree, kEll);
    } catch (const ReconstructionError&) {
    }
  }

  // Interval classifier on the homogeneous model it assumes.
  constexpr double kTheta = 0.85;
  const FixedThetaClassifier cls(kTheta, 1.0, kEll);
  const double bound = classifier_error_bound(kSamples, kTheta, 1.0, kEll);
  const double allowed = bound + 3 * std::sqrt(bound * (1 - bound) / kTrials);
  int worst_pair = 0, pairs_over = 0;
  std::vector<int> wrong(64 * 64, 0);
  for (int t = 0; t < kTrials; ++t) {
    const BalancedTree tree = four_binary_subtrees(derive_seed(kSeed, 13, t));
    const SampleMatrix s = sample_cfn_leaves(tree, EdgeParams::uniform(tree, kTheta), kSamples, derive_seed(kSeed, 14, t));
    const CorrelationTable c = correlations(s);
    const PartialMetric truth = l_topology(tree, kEll);
    for (int u = 0; u < 64; ++u)
      for (int v = u + 1; v < 64; ++v) wrong[u * 64 + v] += cls.classify(c(u, v)) != truth(u, v);
  }
  for (int x : wrong) {
    worst_pair = std::max(worst_pair, x);
    pairs_over += static_cast<double>(x) / kTrials > allowed;
  }
  return {recovered >= 95 && pairs_over == 0,
          fmt("l-topology recovered in %d/%d; classifier: worst pair %d/%d wrong, bound %.2e (+3 sigma %.2e), %d pairs over",
              recovered, kTrials, worst_pair, kTrials, bound, allowed, pairs_over)};
}

Verdict derivative_identity() {
  Rng rng(derive_seed(kSeed, 15));
  double worst = 0;
  int gadgets = 0;
  for (int b = 2; b <= 16; ++b)
    for (int ell = 1; std::pow(b, ell) <= 16; ++ell) {
      const BalancedTree tree = build_bary_tree(b, ell);
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<double> theta(tree.node_count());
        for (double& t : theta) t = rep == 0 ? 0.9 : 0.3 + 0.7 * rng.uniform();
        ++gadgets;
        for (int leaf = 0; leaf < tree.leaf_count(); ++leaf)
          worst = std::max(worst, std::abs(maj_gain_derivative_at_zero(tree, theta, leaf) -
                                           maj_gain_finite_difference(tree, theta, leaf)));
      }
    }
  return {worst <= 1e-6, fmt("%d gadget/fidelity cases, max |closed form - finite difference| = %.2e", gadgets, worst)};
}

}  // namespace

int main() {
  run(1, "majority covariance exactness", 1, majority_covariance);
  run(2, "signed-sum lower bound", 10, signed_sum);
  run(3, "random-cluster equivalence", 30, cluster_equivalence);
  run(4, "information decay bound", 60, mi_decay);
  run(5, "topology counting", 60, topology_counting);
  run(6, "Fano consistency", 10, fano);
  run(7, "oracle reconstruction soundness", 60, oracle_soundness);
  run(8, "supercritical logarithmic scaling", 1800, supercritical_scaling);
  run(9, "subcritical degradation", 1800, subcritical_degradation);
  run(10, "four-point recovery", 600, four_point_recovery);
  run(11, "derivative identity", 60, derivative_identity);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
