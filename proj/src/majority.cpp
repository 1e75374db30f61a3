#include "cfn/majority.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "cfn/sampling.hpp"

namespace cfn {

int maj(std::span<const std::int8_t> values, Rng& tie_rng) {
  if (values.empty()) throw std::invalid_argument("maj of an empty sequence");
  long s = 0;
  for (auto x : values) s += x;
  if (s > 0) return 1;
  if (s < 0) return -1;
  return tie_rng.coin();
}

Rational a_coeff(int d) {
  if (d < 1) throw std::invalid_argument("a(d) needs d >= 1");
  using boost::multiprecision::cpp_int;
  const int c = (d + 1) / 2;
  cpp_int binom = 1;
  for (int i = 1; i <= c; ++i) binom = binom * (d - c + i) / i;
  return Rational(cpp_int(c) * binom, cpp_int(1) << (d - 1));
}

namespace {

// ln(2^(-2e) C(2e, e)) for large e, from the asymptotic series of the
// central binomial coefficient. Relative error below 1e-20 for e > 1e5.
double log_central_binomial_large(double e) {
  return -0.5 * std::log(M_PI * e) - 1.0 / (8 * e) + 1.0 / (192 * e * e * e);
}

}  // namespace

double a_over_d(std::int64_t d) {
  if (d < 1) throw std::invalid_argument("a(d) needs d >= 1");
  const std::int64_t e = d / 2;
  if (e <= 100000) {
    double p = 1.0;
    for (std::int64_t i = 1; i <= e; ++i) p *= static_cast<double>(2 * i - 1) / static_cast<double>(2 * i);
    return p;
  }
  return std::exp(log_central_binomial_large(static_cast<double>(e)));
}

double log_a_coeff(double d) {
  if (d < 1) throw std::invalid_argument("a(d) needs d >= 1");
  if (d <= 2e5) return std::log(d) + std::log(a_over_d(static_cast<std::int64_t>(d)));
  return std::log(d) + log_central_binomial_large(std::floor(d / 2));
}

double maj_covariance_formula(double theta, int d) { return theta * a_over_d(d); }

double maj_covariance_enumeration(double theta, int d) {
  if (d < 1 || d > 30) throw std::invalid_argument("enumeration needs 1 <= d <= 30");
  // X = +1. Voter 0 agrees with X with probability (1+theta)/2, the others
  // are fair coins.
  double e = 0.0;
  const double fair = std::ldexp(1.0, -(d - 1));
  for (std::uint64_t pat = 0; pat < (std::uint64_t{1} << d); ++pat) {
    const int plus = std::popcount(pat);
    const int s = 2 * plus - d;
    if (s == 0) continue;
    const double p0 = (pat & 1) ? (1 + theta) / 2 : (1 - theta) / 2;
    e += (s > 0 ? 1.0 : -1.0) * p0 * fair;
  }
  return e;
}

double signed_sum_expectation(double x, std::span<const double> y) {
  const std::size_t m = y.size();
  if (m > 30) throw std::invalid_argument("too many terms to enumerate");
  for (double v : y) {
    if (!(std::abs(v) <= x)) throw std::invalid_argument("signed sum precondition x >= max|y_i| violated");
  }
  double total = 0.0;
  for (std::uint64_t pat = 0; pat < (std::uint64_t{1} << m); ++pat) {
    double s = x;
    for (std::size_t i = 0; i < m; ++i) s += ((pat >> i) & 1) ? y[i] : -y[i];
    if (s > 0) total += 1;
    else if (s < 0) total -= 1;
  }
  return std::ldexp(total, -static_cast<int>(m));
}

bool signed_sum_lower_bound_check(double x, std::span<const double> y) {
  return signed_sum_expectation(x, y) >= a_over_d(static_cast<std::int64_t>(y.size()) + 1) - 1e-12;
}

namespace {

using Dist = std::vector<double>;  // index = number of +1 leaves

Dist convolve(const Dist& a, const Dist& b) {
  Dist out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// Distribution at the child side of an edge with fidelity t, given the
// parent is +1, from the distribution below the child given the child is +1.
Dist through_edge(const Dist& below, double t) {
  const std::size_t m = below.size() - 1;
  Dist out(below.size());
  const double keep = (1 + t) / 2, flip = (1 - t) / 2;
  for (std::size_t j = 0; j <= m; ++j) out[j] = keep * below[j] + flip * below[m - j];
  return out;
}

double signed_mean(const Dist& d) {
  const long m = static_cast<long>(d.size()) - 1;
  double e = 0.0;
  for (long j = 0; j <= m; ++j) {
    const long s = 2 * j - m;
    if (s > 0) e += d[j];
    else if (s < 0) e -= d[j];
  }
  return e;
}

Dist subtree_distribution(const BalancedTree& tree, const EdgeParams& params, int v) {
  if (tree.is_leaf(v)) return {0.0, 1.0};
  Dist acc{1.0};
  for (int c : tree.children(v)) {
    acc = convolve(acc, through_edge(subtree_distribution(tree, params, c), params.effective(tree, c)));
  }
  return acc;
}

void check_size(const BalancedTree& tree, int max_leaves) {
  if (tree.leaf_count() > max_leaves) {
    throw std::invalid_argument("exact gain limited to " + std::to_string(max_leaves) + " leaves, tree has " +
                                std::to_string(tree.leaf_count()));
  }
}

}  // namespace

double exact_maj_gain(const BalancedTree& tree, const EdgeParams& params, int max_leaves) {
  params.validate(tree);
  check_size(tree, max_leaves);
  return signed_mean(subtree_distribution(tree, params, tree.root()));
}

double exact_maj_gain_minus(const BalancedTree& tree, const EdgeParams& params, int max_leaves) {
  params.validate(tree);
  check_size(tree, max_leaves);
  // Given root = -1 the count of +1 leaves is mirrored.
  Dist d = subtree_distribution(tree, params, tree.root());
  std::reverse(d.begin(), d.end());
  return -signed_mean(d);
}

double homogeneous_gain(int b, int ell, double theta, double eta) {
  if (b < 2 || ell < 0) throw std::invalid_argument("homogeneous_gain: need b >= 2, ell >= 0");
  Dist d{0.0, 1.0};
  for (int level = 0; level < ell; ++level) {
    const Dist one = through_edge(d, level == 0 ? theta * eta : theta);
    Dist acc = one;
    for (int i = 1; i < b; ++i) acc = convolve(acc, one);
    d = std::move(acc);
  }
  return ell == 0 ? 1.0 : signed_mean(d);
}

McEstimate monte_carlo_maj_gain(const BalancedTree& tree, const EdgeParams& params, std::size_t k,
                                std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("monte carlo needs k >= 1");
  EdgeParams plus = params;
  plus.root_plus = 1.0;
  const SampleMatrix s = sample_cfn_leaves(tree, plus, k, derive_seed(seed, 0));
  Rng ties(derive_seed(seed, 1));
  double sum = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    sum += maj(std::span<const std::int8_t>(s.row(t), s.width()), ties);
  }
  McEstimate est;
  est.k = k;
  est.mean = sum / static_cast<double>(k);
  est.std_error = std::sqrt(std::max(0.0, 1.0 - est.mean * est.mean) / static_cast<double>(k));
  return est;
}

namespace {

int gadget_branching(const BalancedTree& tree) {
  if (tree.depth() == 0) return 1;
  const int b = static_cast<int>(tree.children(tree.root()).size());
  for (int v = 0; v < tree.node_count(); ++v) {
    if (!tree.is_leaf(v) && static_cast<int>(tree.children(v).size()) != b) {
      throw ModelError("tree is not a b-ary gadget");
    }
  }
  return b;
}

}  // namespace

double maj_gain_derivative_at_zero(const BalancedTree& tree, const std::vector<double>& theta, int leaf) {
  const int b = gadget_branching(tree);
  if (leaf < 0 || leaf >= tree.leaf_count()) throw ModelError("derivative requested at a non-leaf");
  double path = 1.0;
  for (int v = tree.leaf_node(leaf); v != tree.root(); v = tree.parent(v)) path *= theta.at(v);
  const auto d = static_cast<std::int64_t>(std::llround(std::pow(b, tree.depth())));
  return a_over_d(d) * path;
}

double maj_gain_finite_difference(const BalancedTree& tree, const std::vector<double>& theta, int leaf,
                                  double delta) {
  EdgeParams p;
  p.theta = theta;
  p.eta.assign(tree.leaf_count(), 0.0);
  const double f0 = exact_maj_gain(tree, p);
  p.eta.at(leaf) = 2 * delta;
  const double f2 = exact_maj_gain(tree, p);
  return (f2 - f0) / (2 * delta);
}

double h_fn(double x) {
  if (x >= 0.5) return 1.0;
  return std::min(1.0, x / (1.0 - x));
}

double maj_far_lower_bound(int b, int ell, double theta_min, double eta_max) {
  if (b < 2 || ell < 1) throw std::invalid_argument("maj_far_lower_bound: need b >= 2, ell >= 1");
  const double d = std::pow(b, ell);
  const double lead = std::exp(log_a_coeff(d) - ell * std::log(2.0) - (2 * ell + 1) * std::log(b));
  return lead * std::pow(h_fn(theta_min), ell - 1) * h_fn(theta_min * eta_max);
}

int choose_level(int b, double theta_min, double g, int cutoff) {
  if (b < 2) throw std::invalid_argument("choose_level: b must be at least 2");
  if (!(theta_min > 0 && theta_min <= 1)) throw std::invalid_argument("choose_level: theta_min must be in (0,1]");
  if (g < 0) throw std::invalid_argument("choose_level: g must be non-negative");
  const double log_g = g == 0 ? -std::numeric_limits<double>::infinity() : std::log(g);
  for (int ell = 1; ell <= cutoff; ++ell) {
    const double d = std::pow(static_cast<double>(b), ell);
    if (log_a_coeff(d) + ell * std::log(theta_min) > ell * log_g) return ell;
  }
  throw LevelSearchError("no level up to " + std::to_string(cutoff) + " satisfies a(b^l) theta^l > g^l", cutoff);
}

GainConstants estimate_beta(int b, int ell, double theta_min, const std::vector<double>& eta_grid, double safety,
                            double g) {
  if (!(safety > 0 && safety <= 1)) throw std::invalid_argument("safety factor must be in (0,1]");
  const double gl = std::pow(g, ell);
  auto f = [&](double eta) { return homogeneous_gain(b, ell, theta_min, eta); };
  auto excess = [&](double eta) { return f(eta) - gl * eta; };

  double crossing = 1.0;
  if (excess(1.0) < 0) {
    double lo = 1e-9, hi = 1.0;
    if (excess(lo) <= 0) {
      throw std::runtime_error("gain never exceeds g^l * eta: parameters at or below the threshold for l = " +
                               std::to_string(ell));
    }
    for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
      const double mid = 0.5 * (lo + hi);
      (excess(mid) > 0 ? lo : hi) = mid;
    }
    crossing = lo;
  }

  double beta = f(crossing);
  double alpha = crossing > 0 ? f(crossing) / crossing : 0.0;
  for (double eta : eta_grid) {
    if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("eta grid values must be in (0,1]");
    if (eta >= crossing) beta = std::min(beta, f(eta));
    else alpha = std::min(alpha, f(eta) / eta);
  }
  GainConstants out{ell, safety * alpha, safety * beta, crossing, safety};
  if (!(out.beta > 0)) throw std::runtime_error("estimated beta is not positive");
  return out;
}

std::vector<double> default_eta_grid(int points) {
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = static_cast<double>(i + 1) / points;
  return grid;
}

}  // namespace cfn
