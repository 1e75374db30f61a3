#include "cfn/info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cfn/metric.hpp"
#include "cfn/sampling.hpp"

namespace cfn {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kRelationTol = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Compensated summation; plain sums drift past 1e-12 over 2^17 outcomes.
double stable_sum(const std::vector<double>& v) {
  double total = 0, carry = 0;
  for (double p : v) {
    const double y = p - carry, t = total + y;
    carry = (t - total) - y;
    total = t;
  }
  return total;
}

double plogp_sum(const std::vector<double>& p) {
  double h = 0;
  for (double x : p)
    if (x > 0) h -= x * std::log2(x);
  return h;
}

std::vector<double> dirichlet(int n, Rng& rng) {
  std::vector<double> w(n);
  double s = 0;
  for (double& x : w) s += (x = -std::log(1.0 - rng.uniform()));
  for (double& x : w) x /= s;
  return w;
}

}  // namespace

ExactDistribution::ExactDistribution(std::vector<int> sizes, std::vector<double> pmf)
    : sizes_(std::move(sizes)), pmf_(std::move(pmf)) {
  std::size_t n = 1;
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("variable with empty range");
    n *= static_cast<std::size_t>(s);
  }
  if (pmf_.size() != n) throw std::invalid_argument("pmf size does not match the outcome space");
  for (double p : pmf_)
    if (!(p >= 0)) throw std::invalid_argument("negative or NaN probability");
  const double total = stable_sum(pmf_);
  if (std::abs(total - 1.0) > kNormTol) throw std::invalid_argument("pmf does not sum to 1");
}

int ExactDistribution::value(std::size_t index, int var) const {
  for (int v = 0; v < var; ++v) index /= static_cast<std::size_t>(sizes_[v]);
  return static_cast<int>(index % static_cast<std::size_t>(sizes_[var]));
}

ExactDistribution ExactDistribution::marginal(const std::vector<int>& vars) const {
  std::vector<int> out_sizes;
  std::size_t n = 1;
  for (int v : vars) {
    out_sizes.push_back(sizes_.at(v));
    n *= static_cast<std::size_t>(sizes_[v]);
  }
  std::vector<double> out(n, 0.0);
  std::vector<int> digit(sizes_.size(), 0);
  for (std::size_t i = 0; i < pmf_.size(); ++i) {
    std::size_t j = 0, stride = 1;
    for (int v : vars) {
      j += stride * static_cast<std::size_t>(digit[v]);
      stride *= static_cast<std::size_t>(sizes_[v]);
    }
    out[j] += pmf_[i];
    for (std::size_t v = 0; v < digit.size() && ++digit[v] == sizes_[v]; ++v) digit[v] = 0;
  }
  // Re-normalize away summation drift so the constructor's check holds.
  const double total = stable_sum(out);
  for (double& p : out) p /= total;
  return ExactDistribution(std::move(out_sizes), std::move(out));
}

ExactDistribution ExactDistribution::grouped(const std::vector<int>& first, const std::vector<int>& second) const {
  std::vector<int> vars(first);
  vars.insert(vars.end(), second.begin(), second.end());
  const ExactDistribution m = marginal(vars);
  int a = 1, b = 1;
  for (int v : first) a *= sizes_[v];
  for (int v : second) b *= sizes_[v];
  return ExactDistribution({a, b}, m.pmf());
}

double entropy(const ExactDistribution& dist) { return plogp_sum(dist.pmf()); }

double mutual_information(const ExactDistribution& joint) {
  if (joint.variables() != 2) throw std::invalid_argument("mutual_information needs a two-variable joint");
  return entropy(joint.marginal({0})) + entropy(joint.marginal({1})) - entropy(joint);
}

double mutual_information(const ExactDistribution& joint, const std::vector<int>& x, const std::vector<int>& y) {
  return mutual_information(joint.grouped(x, y));
}

double conditional_entropy(const ExactDistribution& joint) {
  if (joint.variables() != 2) throw std::invalid_argument("conditional_entropy needs a two-variable joint");
  return entropy(joint) - entropy(joint.marginal({1}));
}

double binary_entropy(double p) { return plogp_sum({p, 1.0 - p}); }

ExactDistribution exact_boundary_joint(const BalancedTree& tree, const EdgeParams& params) {
  const int n = tree.leaf_count();
  if (n > 16) throw std::invalid_argument("exact_boundary_joint supports at most 16 leaves");
  EdgeParams plus = params, minus = params;
  plus.root_plus = 1.0;
  minus.root_plus = 0.0;
  const std::vector<double> dp = exact_leaf_distribution(tree, plus);
  const std::vector<double> dm = exact_leaf_distribution(tree, minus);
  const std::size_t m = dp.size();
  std::vector<double> pmf(2 * m);
  for (std::size_t x = 0; x < m; ++x) {
    pmf[2 * x] = (1.0 - params.root_plus) * dm[x];
    pmf[2 * x + 1] = params.root_plus * dp[x];
  }
  const double total = stable_sum(pmf);
  for (double& p : pmf) p /= total;
  return ExactDistribution({2, static_cast<int>(m)}, std::move(pmf));
}

MiBoundCheck mi_root_boundary_check(int b, int q, double theta) {
  if (std::pow(b, q) > 16) throw std::invalid_argument("b^q must be at most 16");
  const BalancedTree tree = build_bary_tree(b, q);
  MiBoundCheck r;
  r.mi = mutual_information(exact_boundary_joint(tree, EdgeParams::uniform(tree, theta)));
  r.bound = std::pow(b, q) * std::pow(theta, 2 * q);
  r.pass = r.mi <= r.bound + 1e-12;
  return r;
}

double fano_max_success(double h, std::int64_t m) {
  if (m < 2) throw std::invalid_argument("alphabet size must be at least 2");
  const double cap = std::log2(static_cast<double>(m));
  if (h < -1e-12 || h > cap + 1e-12) throw std::invalid_argument("conditional entropy out of range");
  const double tail = std::log2(static_cast<double>(m - 1));
  auto f = [&](double d) { return binary_entropy(d) + (1.0 - d) * tail; };
  // f falls from log2 m at 1/m to 0 at 1.
  double lo = 1.0 / static_cast<double>(m), hi = 1.0;
  if (f(hi) >= h) return 1.0;
  if (f(lo) < h) return lo;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) >= h ? lo : hi) = mid;
  }
  return lo;
}

double map_success(const ExactDistribution& joint) {
  if (joint.variables() != 2) throw std::invalid_argument("map_success needs a two-variable joint");
  const int nx = joint.sizes()[0], ny = joint.sizes()[1];
  double s = 0;
  for (int y = 0; y < ny; ++y) {
    double best = 0;
    for (int x = 0; x < nx; ++x) best = std::max(best, joint.pmf()[static_cast<std::size_t>(y) * nx + x]);
    s += best;
  }
  return s;
}

BigInt n_topologies(int b, int ell) {
  if (b < 2 || ell < 1) throw std::invalid_argument("n_topologies needs b >= 2 and ell >= 1");
  BigInt leaves = 1, internal = 0, level = 1;
  for (int j = 0; j < ell; ++j) {
    internal += level;
    level *= b;
  }
  leaves = level;
  BigInt num = 1;
  for (BigInt i = 2; i <= leaves; ++i) num *= i;
  BigInt bf = 1;
  for (int i = 2; i <= b; ++i) bf *= i;
  BigInt den = 1;
  for (BigInt i = 0; i < internal; ++i) den *= bf;
  return num / den;
}

std::int64_t enumerate_topologies(int b, int ell) {
  const BalancedTree tree = build_bary_tree(b, ell);
  const int n = tree.leaf_count();
  if (n > 10) throw std::invalid_argument("enumeration limited to 10 leaves");
  const DistanceMatrix base = pairwise_leaf_distances(tree);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::set<std::vector<int>> seen;
  do {
    std::vector<int> key(static_cast<std::size_t>(n) * n);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) key[static_cast<std::size_t>(perm[u]) * n + perm[v]] = base(u, v);
    seen.insert(std::move(key));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<std::int64_t>(seen.size());
}

double log_big(const BigInt& x) {
  if (x <= 0) throw std::invalid_argument("log of a non-positive integer");
  const unsigned bits = boost::multiprecision::msb(x);
  if (bits < 53) return std::log(x.convert_to<double>());
  const unsigned shift = bits - 52;
  const BigInt top = x >> shift;
  return std::log(top.convert_to<double>()) + shift * std::log(2.0);
}

LowerBound lower_bound_delta(int b, double theta, int q, double k, int ell) {
  const double bt2 = b * theta * theta;
  if (!(bt2 < 1)) throw std::invalid_argument("the bound needs b theta^2 < 1");
  if (ell < 1 || ell >= q) throw std::invalid_argument("the bound needs 1 <= ell < q");
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  auto at = [&](int l) {
    const double log_m = log_big(n_topologies(b, l));
    // ell = 1 gives m = 1; the second term is then unbounded and the
    // bound carries no information.
    if (log_m <= 0) return kInf;
    const double first = std::exp(1.0 - 0.5 * log_m);
    const double second = 2.0 * k * (b + 1) * std::pow(b, q) * std::pow(theta, 2.0 * (q - l)) / (log_m / std::log(2.0));
    return std::max(first, second);
  };
  LowerBound r;
  r.at_given_ell = at(ell);
  const double raw = std::floor((std::log(q) + std::log(-std::log(bt2))) / std::log(b));
  int pl = std::isfinite(raw) ? static_cast<int>(std::clamp(raw, -1e6, 1e6)) : 1;
  r.default_ell_clamped = pl < 1 || pl > q - 1;
  r.default_ell = std::clamp(pl, 1, q - 1);
  r.at_default_ell = at(r.default_ell);
  r.value = std::min(r.at_given_ell, r.at_default_ell);
  return r;
}

DataProcessingCheck data_processing_check(const ExactDistribution& xyz) {
  if (xyz.variables() != 3) throw std::invalid_argument("data_processing_check needs a joint over (X, Y, Z)");
  const ExactDistribution xy = xyz.marginal({0, 1}), yz = xyz.marginal({1, 2}), y = xyz.marginal({1});
  const int nx = xyz.sizes()[0], ny = xyz.sizes()[1], nz = xyz.sizes()[2];
  for (int a = 0; a < nx; ++a)
    for (int c = 0; c < ny; ++c)
      for (int e = 0; e < nz; ++e) {
        const double lhs = xyz.pmf()[(static_cast<std::size_t>(e) * ny + c) * nx + a] * y.pmf()[c];
        const double rhs = xy.pmf()[static_cast<std::size_t>(c) * nx + a] * yz.pmf()[static_cast<std::size_t>(e) * ny + c];
        if (std::abs(lhs - rhs) > kRelationTol) throw std::invalid_argument("X and Z are not independent given Y");
      }
  DataProcessingCheck r;
  r.i_xy = mutual_information(xyz, {0}, {1});
  r.i_yz = mutual_information(xyz, {1}, {2});
  r.i_xz = mutual_information(xyz, {0}, {2});
  r.i_xy_z = mutual_information(xyz, {0, 1}, {2});
  r.i_xz_y = mutual_information(xyz, {0, 2}, {1});
  r.dpl = r.i_xz <= std::min(r.i_xy, r.i_yz) + kRelationTol;
  r.chain = std::abs(r.i_xy_z - r.i_yz) <= kRelationTol;
  r.subadditive = r.i_xz_y <= r.i_xy + r.i_yz + kRelationTol;
  return r;
}

ExactDistribution random_markov_chain(int nx, int ny, int nz, Rng& rng) {
  const std::vector<double> px = dirichlet(nx, rng);
  std::vector<std::vector<double>> py(nx), pz(ny);
  for (auto& row : py) row = dirichlet(ny, rng);
  for (auto& row : pz) row = dirichlet(nz, rng);
  std::vector<double> pmf(static_cast<std::size_t>(nx) * ny * nz);
  for (int a = 0; a < nx; ++a)
    for (int c = 0; c < ny; ++c)
      for (int e = 0; e < nz; ++e) pmf[(static_cast<std::size_t>(e) * ny + c) * nx + a] = px[a] * py[a][c] * pz[c][e];
  return ExactDistribution({nx, ny, nz}, std::move(pmf));
}

ExactDistribution random_joint(int nx, int ny, Rng& rng) {
  return ExactDistribution({nx, ny}, dirichlet(nx * ny, rng));
}

}  // namespace cfn
