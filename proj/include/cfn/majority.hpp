#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cfn/rng.hpp"
#include "cfn/tree.hpp"

namespace cfn {

using Rational = boost::multiprecision::cpp_rational;

/// Sign of the sum; an exact tie is broken by a fair coin from tie_rng.
/// Throws std::invalid_argument on empty input.
int maj(std::span<const std::int8_t> values, Rng& tie_rng);

/// 2^(1-d) * ceil(d/2) * C(d, ceil(d/2)), exactly. Requires d >= 1.
Rational a_coeff(int d);
/// a(d)/d as a double. Equals the probability that a symmetric walk of
/// 2*floor(d/2) steps ends at zero.
double a_over_d(std::int64_t d);
/// Natural log of a(d), valid for very large d.
double log_a_coeff(double d);

/// theta * a(d)/d: the gain of a d-voter majority in which one voter has
/// correlation theta with the target and the rest are fair coins.
double maj_covariance_formula(double theta, int d);
/// The same quantity by enumerating all 2^d voter patterns.
double maj_covariance_enumeration(double theta, int d);

/// E[sign(x + sum_i s_i y_i)] over independent fair signs s_i, ties
/// counting 0, by enumerating all 2^(d-1) patterns. Requires
/// x >= max|y_i| and d - 1 <= 30.
double signed_sum_expectation(double x, std::span<const double> y);
/// True when signed_sum_expectation(x, y) >= a(d)/d with d = |y| + 1, up
/// to a 1e-12 rounding allowance.
bool signed_sum_lower_bound_check(double x, std::span<const double> y);

/// E[Maj(boundary) | root = +1] under the CFN model given by params
/// (root_plus is ignored). Dynamic programming over subtree sum
/// distributions, quadratic in the leaf count. Throws
/// std::invalid_argument above max_leaves.
double exact_maj_gain(const BalancedTree& tree, const EdgeParams& params, int max_leaves = 4096);

/// The gain conditioned on root = -1, negated (equal by symmetry).
double exact_maj_gain_minus(const BalancedTree& tree, const EdgeParams& params, int max_leaves = 4096);

/// exact_maj_gain on the ell-level b-ary tree with every fidelity theta and
/// every leaf attenuation eta. Uses one distribution per level.
double homogeneous_gain(int b, int ell, double theta, double eta);

struct McEstimate {
  double mean = 0;
  double std_error = 0;
  std::size_t k = 0;
};

/// Monte Carlo estimate of exact_maj_gain from k simulated boundaries.
McEstimate monte_carlo_maj_gain(const BalancedTree& tree, const EdgeParams& params, std::size_t k,
                                std::uint64_t seed);

/// d/d eta(leaf) of the gain at eta = 0 on a b-ary gadget:
/// a(b^ell)/b^ell times the fidelity product on the root-to-leaf path.
/// Throws ModelError if the tree is not b-ary.
double maj_gain_derivative_at_zero(const BalancedTree& tree, const std::vector<double>& theta, int leaf);

/// [gain(eta = 2*delta*e_leaf) - gain(eta = 0)] / (2*delta), the central
/// difference around delta.
double maj_gain_finite_difference(const BalancedTree& tree, const std::vector<double>& theta, int leaf,
                                  double delta = 1e-4);

/// min{1, x/(1-x)}, with h(x) = 1 for x >= 1/2.
double h_fn(double x);

/// a(b^ell) / (2^ell b^(2 ell + 1)) * h(theta_min)^(ell - 1) * h(theta_min eta_max).
double maj_far_lower_bound(int b, int ell, double theta_min, double eta_max);

/// Raised when no level up to the cutoff satisfies the growth condition.
class LevelSearchError : public std::runtime_error {
 public:
  LevelSearchError(const std::string& what, int cutoff) : std::runtime_error(what), cutoff_(cutoff) {}
  int cutoff() const { return cutoff_; }

 private:
  int cutoff_;
};

/// Smallest ell >= 1 with a(b^ell) theta_min^ell > g^ell.
int choose_level(int b, double theta_min, double g, int cutoff = 64);

/// Operational constants for one lifting stage on the ell-level b-ary tree
/// with every fidelity at theta_min: gain(eta) >= min{alpha * eta, beta}
/// holds on the evaluation grid.
struct GainConstants {
  int ell = 0;
  double alpha = 0;
  double beta = 0;
  /// Crossing point of gain(eta) = g^ell * eta (the fixed point when g = 1).
  double crossing = 0;
  double safety = 0;
};

/// Evaluates gain(theta_min, eta) for constant eta and locates the crossing
/// eta_c of gain(eta) = g^ell * eta by bisection. beta is
/// safety * min of the gain over grid points at or above eta_c; alpha is
/// safety * min of gain(eta)/eta over grid points below it. Throws
/// std::runtime_error if beta is not positive.
GainConstants estimate_beta(int b, int ell, double theta_min, const std::vector<double>& eta_grid,
                            double safety = 0.9, double g = 1.0);

/// Evenly spaced grid (0, 1] with `points` entries.
std::vector<double> default_eta_grid(int points = 200);

}  // namespace cfn
