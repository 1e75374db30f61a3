#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cfn/majority.hpp"
#include "cfn/sampling.hpp"
#include "shapes.hpp"

using namespace cfn;

namespace {

// E[Maj(leaves) | root = +1] from the exact leaf distribution; ties count 0.
double gain_by_enumeration(const BalancedTree& t, EdgeParams p) {
  p.root_plus = 1.0;
  const auto dist = exact_leaf_distribution(t, p);
  double g = 0;
  for (std::size_t x = 0; x < dist.size(); ++x) {
    const int plus = std::popcount(x);
    const int sum = 2 * plus - t.leaf_count();
    g += dist[x] * (sum > 0 ? 1 : sum < 0 ? -1 : 0);
  }
  return g;
}

}  // namespace

TEST(Majority, MajBreaksTiesWithCoin) {
  Rng rng(1);
  const std::vector<std::int8_t> up{1, 1, -1}, tie{1, -1};
  EXPECT_EQ(maj(up, rng), 1);
  int plus = 0;
  for (int i = 0; i < 2000; ++i) plus += maj(tie, rng) > 0;
  EXPECT_NEAR(plus, 1000, 4 * std::sqrt(500.0));
  EXPECT_THROW(maj(std::span<const std::int8_t>{}, rng), std::invalid_argument);
}

TEST(Majority, ACoeffValues) {
  EXPECT_EQ(a_coeff(1), Rational(1));
  EXPECT_EQ(a_coeff(2), Rational(1));
  EXPECT_EQ(a_coeff(3), Rational(3, 2));
  EXPECT_EQ(a_coeff(4), Rational(3, 2));
  EXPECT_EQ(a_coeff(5), Rational(15, 8));
  EXPECT_DOUBLE_EQ(a_over_d(4), 3.0 / 8);
  EXPECT_DOUBLE_EQ(a_over_d(7), 20.0 / 64);
}

TEST(Majority, LogACoeffLargeD) {
  for (int d : {1, 2, 7, 50, 333}) EXPECT_NEAR(log_a_coeff(d), std::log(a_coeff(d).convert_to<double>()), 1e-10);
  // ln a(d) = ln d + ln(C(2e,e) / 4^e) with e = d/2; Stirling to O(e^-3).
  const double d = 2e12, e = 1e12;
  const double expected = std::log(d) - 0.5 * std::log(std::numbers::pi * e) - 1 / (8 * e);
  EXPECT_NEAR(log_a_coeff(d), expected, 1e-12);
  EXPECT_TRUE(std::isfinite(log_a_coeff(1e300)));
}

TEST(Majority, CovarianceFormulaMatchesEnumeration) {
  for (int d = 1; d <= 11; ++d)
    for (double theta : {0.0, 0.3, 0.77, 1.0})
      EXPECT_NEAR(maj_covariance_formula(theta, d), maj_covariance_enumeration(theta, d), 1e-12) << d;
}

TEST(Majority, SignedSumLowerBound) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(10));
    std::vector<double> y(d - 1);
    double x = 0;
    for (double& v : y) {
      v = rng.uniform();
      x = std::max(x, v);
    }
    x = std::max(x + rng.uniform() * 0.5, 1e-3);
    EXPECT_TRUE(signed_sum_lower_bound_check(x, y));
  }
  // Equal weights attain the bound.
  const std::vector<double> ones(4, 1.0);
  EXPECT_NEAR(signed_sum_expectation(1.0, ones), a_over_d(5), 1e-12);
}

TEST(Majority, ExactGainMatchesEnumeration) {
  int checked = 0;
  for (const auto& shape : cfn::testing::all_shapes(8)) {
    const BalancedTree t = cfn::testing::to_tree(shape);
    const EdgeParams p = EdgeParams::random_interval(t, 0.3, 0.95, 11 + checked, 0.6);
    EXPECT_NEAR(exact_maj_gain(t, p), gain_by_enumeration(t, p), 1e-12);
    EXPECT_NEAR(exact_maj_gain_minus(t, p), exact_maj_gain(t, p), 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Majority, HomogeneousGain) {
  EXPECT_NEAR(homogeneous_gain(3, 1, 0.6, 1.0), 0.792, 1e-12);
  const BalancedTree t = build_bary_tree(2, 3);
  EXPECT_NEAR(homogeneous_gain(2, 3, 0.8, 0.7), exact_maj_gain(t, EdgeParams::uniform(t, 0.8, 0.7)), 1e-12);
  EXPECT_THROW(exact_maj_gain(build_bary_tree(2, 4), EdgeParams::uniform(build_bary_tree(2, 4), 0.8), 8),
               std::invalid_argument);
}

TEST(Majority, MonteCarloAgrees) {
  const BalancedTree t = build_bary_tree(3, 2);
  const EdgeParams p = EdgeParams::uniform(t, 0.8, 0.9);
  const McEstimate mc = monte_carlo_maj_gain(t, p, 40000, 5);
  EXPECT_NEAR(mc.mean, exact_maj_gain(t, p), 4 * mc.std_error);
}

TEST(Majority, DerivativeAtZero) {
  const BalancedTree t = build_bary_tree(2, 2);
  std::vector<double> theta(t.node_count());
  for (int v = 0; v < t.node_count(); ++v) theta[v] = 0.6 + 0.05 * v;
  for (int leaf = 0; leaf < 4; ++leaf) {
    EXPECT_NEAR(maj_gain_derivative_at_zero(t, theta, leaf), maj_gain_finite_difference(t, theta, leaf), 1e-6);
  }
  EXPECT_THROW(maj_gain_derivative_at_zero(build_regular_star_tree(2, 1), theta, 0), ModelError);
}

TEST(Majority, FarBound) {
  EXPECT_DOUBLE_EQ(h_fn(0.25), 1.0 / 3);
  EXPECT_DOUBLE_EQ(h_fn(0.5), 1.0);
  EXPECT_DOUBLE_EQ(h_fn(0.9), 1.0);
  EXPECT_DOUBLE_EQ(maj_far_lower_bound(2, 1, 0.5, 1.0), 1.0 / 16);
}

TEST(Majority, ChooseLevelFrozen) {
  EXPECT_EQ(choose_level(2, 0.9, 1.0), 2);
  EXPECT_EQ(choose_level(2, 0.85, 1.0), 2);
  EXPECT_EQ(choose_level(2, 0.8, 1.0), 3);
  EXPECT_EQ(choose_level(2, 0.99, 1.0), 2);
  EXPECT_EQ(choose_level(3, 0.7, 1.0), 1);
  EXPECT_THROW(choose_level(2, 0.55, 1.0), LevelSearchError);
}

TEST(Majority, EstimateBeta) {
  const GainConstants gc = estimate_beta(2, 2, 0.85, default_eta_grid());
  EXPECT_EQ(gc.ell, 2);
  EXPECT_NEAR(gc.beta, 0.509814, 1e-5);
  EXPECT_GT(gc.alpha, 0);
  EXPECT_GT(gc.crossing, 0);
  EXPECT_LE(gc.crossing, 1);
  for (double eta : default_eta_grid()) {
    EXPECT_GE(homogeneous_gain(2, 2, 0.85, eta) + 1e-12, std::min(gc.alpha * eta, gc.beta)) << eta;
  }
  // The crossing solves gain(eta) = eta.
  EXPECT_NEAR(homogeneous_gain(2, 2, 0.85, gc.crossing), gc.crossing, 1e-8);
}

TEST(Majority, StirlingBand) {
  for (int d = 64; d <= 4096; d *= 2) {
    const double ratio = std::exp(log_a_coeff(d)) / (std::sqrt(2 / std::numbers::pi) * std::sqrt(d));
    EXPECT_GE(ratio, 0.9);
    EXPECT_LE(ratio, 1.1);
  }
}

TEST(Majority, GainFloorAtChosenLevel) {
  const int ell = choose_level(2, 0.9, 1.0);
  const GainConstants gc = estimate_beta(2, ell, 0.9, default_eta_grid());
  const BalancedTree t = build_bary_tree(2, ell);
  Rng rng(12);
  for (double eta0 : {0.05, 0.3, 0.7, 1.0}) {
    // Heterogeneous leaf attenuations, all at least eta0.
    EdgeParams p = EdgeParams::uniform(t, 0.9, eta0);
    for (double& e : p.eta) e = eta0 + (1 - eta0) * rng.uniform();
    EXPECT_GE(exact_maj_gain(t, p) + 1e-12, std::min(gc.alpha * eta0, gc.beta)) << eta0;
  }
}

TEST(Majority, Extremes) {
  Rng rng(2);
  const std::vector<std::int8_t> v{-1, -1, -1, 1};
  EXPECT_EQ(maj(v, rng), -1);
  for (int b : {2, 3})
    for (int ell : {1, 2}) {
      EXPECT_NEAR(homogeneous_gain(b, ell, 1.0, 1.0), 1.0, 1e-12);
      EXPECT_NEAR(homogeneous_gain(b, ell, 0.0, 1.0), 0.0, 1e-12);
    }
  const BalancedTree t = build_bary_tree(2, 3);
  EXPECT_DOUBLE_EQ(monte_carlo_maj_gain(t, EdgeParams::uniform(t, 1.0, 1.0), 500, 4).mean, 1.0);
}

TEST(Majority, DerivativeExtremes) {
  const BalancedTree t = build_bary_tree(3, 1);
  std::vector<double> theta(t.node_count(), 1.0);
  EXPECT_NEAR(maj_gain_derivative_at_zero(t, theta, 0), 0.5, 1e-12);
  theta[t.leaf_node(0)] = 0.0;
  EXPECT_NEAR(maj_gain_derivative_at_zero(t, theta, 0), 0.0, 1e-12);
}

TEST(Majority, FarBoundLimitsAndValidity) {
  EXPECT_LT(maj_far_lower_bound(2, 2, 1e-6, 1.0), 1e-9);
  const BalancedTree t = build_bary_tree(2, 2);
  for (double theta : {0.5, 0.7, 0.9, 1.0})
    EXPECT_LE(maj_far_lower_bound(2, 2, theta, 1.0), exact_maj_gain(t, EdgeParams::uniform(t, theta, 1.0)) + 1e-12);
}

TEST(Majority, LevelAndBetaMonotone) {
  EXPECT_EQ(choose_level(2, 0.9, 0.0), 1);
  EXPECT_GE(estimate_beta(2, 2, 1.0, default_eta_grid()).beta, 0.9);
  const GainConstants lo = estimate_beta(2, 2, 0.85, default_eta_grid());
  const GainConstants hi = estimate_beta(2, 2, 0.95, default_eta_grid());
  EXPECT_GE(hi.beta, lo.beta);
  EXPECT_LE(lo.beta, homogeneous_gain(2, 2, 0.85, lo.beta) + 1e-12);
}
