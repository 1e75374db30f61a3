#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cfn/rng.hpp"
#include "cfn/tree.hpp"

namespace cfn {

using BigInt = boost::multiprecision::cpp_int;

/// Joint pmf over a product of finite variables. Variable 0 is the fastest
/// moving digit of the flat index.
class ExactDistribution {
 public:
  ExactDistribution() = default;
  /// Throws std::invalid_argument if the pmf has the wrong size, a negative
  /// entry, or does not sum to 1 within 1e-12.
  ExactDistribution(std::vector<int> sizes, std::vector<double> pmf);

  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<double>& pmf() const { return pmf_; }
  int variables() const { return static_cast<int>(sizes_.size()); }
  std::size_t outcomes() const { return pmf_.size(); }

  /// Digit of variable `var` in flat index `index`.
  int value(std::size_t index, int var) const;

  /// Marginal over `vars`, in the given order.
  ExactDistribution marginal(const std::vector<int>& vars) const;
  /// Joint of two groups of variables as a two-variable distribution whose
  /// variables are the flattened groups.
  ExactDistribution grouped(const std::vector<int>& first, const std::vector<int>& second) const;

 private:
  std::vector<int> sizes_;
  std::vector<double> pmf_;
};

/// Shannon entropy in bits of the whole joint.
double entropy(const ExactDistribution& dist);
/// I(X,Y) = H(X) + H(Y) - H(X,Y) in bits for a two-variable joint.
double mutual_information(const ExactDistribution& joint);
/// I between two groups of variables of a larger joint.
double mutual_information(const ExactDistribution& joint, const std::vector<int>& x, const std::vector<int>& y);
/// H(X|Y) = H(X,Y) - H(Y) for a two-variable joint (X first).
double conditional_entropy(const ExactDistribution& joint);
/// Binary entropy in bits.
double binary_entropy(double p);

/// Joint of the root color (variable 0, index 1 means +1) and the boundary
/// pattern (variable 1, bit i means leaf i is +1). At most 16 leaves.
ExactDistribution exact_boundary_joint(const BalancedTree& tree, const EdgeParams& params);

struct MiBoundCheck {
  double mi = 0;
  double bound = 0;
  bool pass = false;
};

/// Exact root/boundary information on the q-level b-ary tree with uniform
/// fidelity theta against b^q theta^(2q). Requires b^q <= 16.
MiBoundCheck mi_root_boundary_check(int b, int q, double theta);

/// Largest success probability D in [1/m, 1] with
/// H(D) + (1 - D) log2(m - 1) >= h, by bisection to 1e-10.
double fano_max_success(double h, std::int64_t m);

/// Success of the maximum a posteriori guess of X from Y for a
/// two-variable joint (X first): sum over y of max_x p(x, y).
double map_success(const ExactDistribution& joint);

/// (b^ell)! / (b!)^(1 + b + ... + b^(ell-1)).
BigInt n_topologies(int b, int ell);
/// Independent count: applies every leaf permutation to the ell-level b-ary
/// tree and counts distinct leaf distance matrices. Feasible for b^ell <= 10.
std::int64_t enumerate_topologies(int b, int ell);
/// Natural log of a positive big integer.
double log_big(const BigInt& x);

struct LowerBound {
  double at_given_ell = 0;
  /// ell = floor(log_b q + log_b(-ln(b theta^2))), clamped to [1, q - 1].
  int default_ell = 0;
  bool default_ell_clamped = false;
  double at_default_ell = 0;
  double value = 0;  ///< minimum of the two
};

/// max{e / sqrt(m), 2k(b+1) b^q theta^(2(q-ell)) / log2 m} with
/// m = n_topologies(b, ell), at the given ell and at the clamped default.
/// Requires b theta^2 < 1 and 1 <= ell < q.
LowerBound lower_bound_delta(int b, double theta, int q, double k, int ell);

struct DataProcessingCheck {
  double i_xy = 0, i_yz = 0, i_xz = 0, i_xy_z = 0, i_xz_y = 0;
  bool dpl = false;          ///< I(X,Z) <= min{I(X,Y), I(Y,Z)}
  bool chain = false;        ///< I((X,Y),Z) = I(Y,Z)
  bool subadditive = false;  ///< I((X,Z),Y) <= I(X,Y) + I(Z,Y)
  bool pass() const { return dpl && chain && subadditive; }
};

/// Checks the three relations to 1e-10 on a joint over (X, Y, Z). Throws
/// std::invalid_argument unless p(x,y,z) p(y) = p(x,y) p(y,z) within 1e-10.
DataProcessingCheck data_processing_check(const ExactDistribution& xyz);

/// Random joint over (X, Y, Z) built as p(x) p(y|x) p(z|y), each factor
/// drawn from a flat Dirichlet.
ExactDistribution random_markov_chain(int nx, int ny, int nz, Rng& rng);
/// Random two-variable joint with flat Dirichlet weights.
ExactDistribution random_joint(int nx, int ny, Rng& rng);

}  // namespace cfn
