#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cfn/distance.hpp"
#include "cfn/metric.hpp"

namespace cfn {

/// -ln c for every pair of a correlation table (+infinity when c <= 0).
class DStarTable {
 public:
  DStarTable() = default;
  explicit DStarTable(const CorrelationTable& c);

  int size() const { return n_; }
  double operator()(int u, int v) const { return d_[static_cast<std::size_t>(u) * n_ + v]; }

 private:
  int n_ = 0;
  std::vector<double> d_;
};

/// The pairing {a,b}|{c,d} of a quartet.
struct Split {
  int a, b, c, d;
};

/// The three splits of {q0,q1,q2,q3}: q0q1|q2q3, q0q2|q1q3, q0q3|q1q2.
std::array<Split, 3> splits_of(const std::array<int, 4>& quartet);

/// D*(a,b) + D*(c,d); infinite if either is.
double split_weight(const DStarTable& d, const Split& s);

/// Decision margins for split comparison.
struct SplitTolerance {
  double eps = 0;
  double eps_prime = 0;

  /// eps = (1 - theta_max)/4, eps' = -ln(theta_max)/4.
  static SplitTolerance from_theta_max(double theta_max);
  /// Gaps below this are ties, above it separations.
  double threshold() const { return 2 * (eps + eps_prime); }
};

struct MinimalSplits {
  /// Bit i set when splits_of(quartet)[i] is minimal.
  std::uint8_t mask = 0;
  /// Some gap to the smallest weight fell in [4 eps, 4 eps').
  bool margin_violation = false;
};

/// Split i is minimal when its weight is below every other weight plus
/// 2(eps + eps'). Infinite weights are minimal only when all three are.
MinimalSplits minimal_splits(const DStarTable& d, const std::array<int, 4>& quartet, const SplitTolerance& tol);

/// theta_min^(2 ell + 2) * eta_min^2 / 2.
double theta_star(double theta_min, double eta_min, int ell);

/// Correlation-threshold relations R (c >= t*), R~ (c >= 3/2 t*) and
/// R' (c >= 15/8 t*), so R' is contained in R~ which is contained in R.
struct ProximityRelations {
  double theta_star = 0;
  int n = 0;
  std::vector<std::uint8_t> r, r_tilde, r_prime;

  bool R(int u, int v) const { return r[idx(u, v)]; }
  bool R_tilde(int u, int v) const { return r_tilde[idx(u, v)]; }
  bool R_prime(int u, int v) const { return r_prime[idx(u, v)]; }

 private:
  std::size_t idx(int u, int v) const { return static_cast<std::size_t>(u) * n + v; }
};

ProximityRelations build_relations(const CorrelationTable& c, double theta_star);

/// How the candidate set around a leaf is chosen while testing d = 2r.
enum class NeighborhoodRule {
  /// The R~ neighbourhood for the target level ell at every r.
  kTargetLevel,
  /// The R~ neighbourhood for level r itself (threshold
  /// 3/2 theta_min^(2r+2) eta_min^2 / 2). Still contains every leaf within
  /// 2r + 2, which is all the test at level r needs, with fewer distant
  /// and hence noisier leaves.
  kPerLevel,
};

struct FourPointOptions {
  NeighborhoodRule rule = NeighborhoodRule::kPerLevel;
  /// Neighbourhoods larger than this are truncated to their most correlated
  /// members and reported.
  int max_neighborhood = 128;
  /// Decide level r >= 2 per pair of vertex classes (leaves already known
  /// to be within 2r - 2 of each other share their distance to everything
  /// farther away): a class pair is at 2r when the test passes for any
  /// member pair. Identical to the per-pair rule on exact input.
  bool class_vote = true;
  /// Keep one audit record per rejected (u, v, r) test.
  bool audit = false;
};

/// One rejected d(u,v) = 2r test: the first quartet whose split uv|ww' was
/// not minimal.
struct SplitAudit {
  int u, v, r, w, w_prime;
  std::array<double, 3> weights;  // uv|ww', uw|vw', uw'|vw
};

struct FourPointDiagnostics {
  std::size_t quartets_evaluated = 0;
  std::size_t margin_violations = 0;
  /// Pairs where the test from u and the test from v disagreed.
  std::size_t orientation_disagreements = 0;
  std::size_t truncated_neighborhoods = 0;
  int largest_neighborhood = 0;
  std::vector<SplitAudit> audit;
};

struct FourPointResult {
  PartialMetric metric;
  FourPointDiagnostics diagnostics;
};

/// Recovers the ell-topology from a correlation table of a CFN model with
/// fidelities in [theta_min, theta_max] and attenuations >= eta_min.
/// For r = 1..ell, d(u,v) = 2r when v lies in the neighbourhood of u, not
/// within 2r - 2 of u, and the split uv|ww' is minimal for every pair
/// {w, w'} of neighbours farther than 2r - 2 from both u and v. A pair is
/// accepted when the test passes from either endpoint (or, with class_vote,
/// for any pair of their classes). Unresolved pairs get
/// the cap. Throws ReconstructionError when the result is not the
/// ell-topology of any balanced tree.
FourPointResult recover_l_topology(const CorrelationTable& c, double theta_min, double theta_max, double eta_min,
                                   int ell, const FourPointOptions& options = {});

/// Samples-in variant: correlations first.
FourPointResult recover_l_topology(const SampleMatrix& samples, double theta_min, double theta_max,
                                   double eta_min, int ell, const FourPointOptions& options = {});

/// Capped distances as `u,v,d` CSV rows (1-based, upper triangle).
void write_metric_csv(std::ostream& out, const PartialMetric& pm);

/// One JSON object per line.
void write_split_audit_jsonl(std::ostream& out, const std::vector<SplitAudit>& audit);

}  // namespace cfn
