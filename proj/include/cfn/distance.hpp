#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "cfn/samples.hpp"
#include "cfn/tree.hpp"

namespace cfn {

/// Symmetric table of pairwise correlations c(u,v) in [-1, 1] with unit
/// diagonal, plus the sample count it came from (0 for exact tables).
class CorrelationTable {
 public:
  CorrelationTable() = default;
  CorrelationTable(int n, std::size_t k) : n_(n), k_(k), c_(static_cast<std::size_t>(n) * n, 0.0) {
    for (int i = 0; i < n; ++i) c_[static_cast<std::size_t>(i) * n + i] = 1.0;
  }

  int size() const { return n_; }
  std::size_t k() const { return k_; }
  double operator()(int u, int v) const { return c_[static_cast<std::size_t>(u) * n_ + v]; }
  void set(int u, int v, double value) {
    c_[static_cast<std::size_t>(u) * n_ + v] = value;
    c_[static_cast<std::size_t>(v) * n_ + u] = value;
  }

 private:
  int n_ = 0;
  std::size_t k_ = 0;
  std::vector<double> c_;
};

/// Mean of sigma_u * sigma_v over the rows, for every column pair. Columns
/// are bit-packed and compared with popcount, so the sums are exact.
CorrelationTable correlations(const SampleMatrix& samples);

/// Model correlations eta(u) eta(v) prod theta(e) along each leaf path.
CorrelationTable exact_correlations(const BalancedTree& tree, const EdgeParams& params);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// -ln c for c > 0, +infinity otherwise.
double dstar(double c);

/// Interval classifier for a model where every edge has fidelity theta and
/// every leaf attenuation eta. With alpha_r = eta^2 theta^(2r), returns 2r
/// for the first r in 1..ell with c > (alpha_(r+1) + alpha_r)/2, and the
/// cap 2 ell + 2 when there is none. Correlations above the top interval
/// map to 2.
class FixedThetaClassifier {
 public:
  FixedThetaClassifier(double theta, double eta, int ell);

  int classify(double c) const;
  int ell() const { return ell_; }
  int far() const { return 2 * ell_ + 2; }
  /// thresholds()[r-1] is the lower edge of the interval mapped to 2r.
  const std::vector<double>& thresholds() const { return lower_; }

 private:
  int ell_;
  std::vector<double> lower_;
};

int classify_distance_fixed_theta(double c, double theta, double eta, int ell);

/// 2 exp(-a^2 / (2k)) where a is the deviation of a sum of k terms in [-1,1].
double hoeffding_tail(double k, double a);

/// 2 exp(-k eta^4 theta^(4 ell) (1 - theta^2)^2 / 8): the bound on the
/// probability that the interval classifier mislabels one pair.
double classifier_error_bound(double k, double theta, double eta, int ell);

/// Upper triangle as `u,v,value` rows with 1-based labels.
void write_correlations_csv(std::ostream& out, const CorrelationTable& table);

}  // namespace cfn
