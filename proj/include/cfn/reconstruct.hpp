#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cfn/distance.hpp"
#include "cfn/four_point.hpp"
#include "cfn/metric.hpp"
#include "cfn/samples.hpp"
#include "cfn/tree.hpp"

namespace cfn {

enum class Regime { kFixed, kGeneral };

struct ReconstructionConfig {
  Regime regime = Regime::kFixed;
  /// Minimum number of children of a non-root internal node.
  int b = 2;
  /// Fidelity bounds; equal in the fixed regime.
  double theta_min = 0;
  double theta_max = 0;
  /// Levels lifted per stage.
  int ell = 1;
  /// Operational floor on the lift gain (general regime).
  double beta = 0;
  /// Decay base; 1 above the threshold, < 1 below it.
  double g = 1.0;
  /// Attenuation of the raw leaves (1 unless the model says otherwise).
  double leaf_eta = 1.0;
  std::uint64_t seed = 0;
  FourPointOptions four_point;

  /// Fixed regime with ell from choose_level(b, theta, 1).
  static ReconstructionConfig fixed(int b, double theta, std::uint64_t seed = 0);
  /// General regime with ell = choose_level(b, theta_min, g) and beta from
  /// estimate_beta with the default grid and safety factor.
  static ReconstructionConfig general(int b, double theta_min, double theta_max, double g = 1.0,
                                     std::uint64_t seed = 0);

  /// Throws std::invalid_argument on out-of-range fields, including
  /// b theta_min^2 = g^2 in the general regime.
  void validate() const;
};

/// Colorings of the vertices at one height, each named by its leaf set.
struct PseudoLeafColoring {
  int level = 0;
  std::vector<LeafSet> labels;
  SampleMatrix values;
};

/// The vertices of `labels` at height level-ell under each vertex at
/// height `level` of the labeling: for every new vertex, b children with
/// the smallest label sets at each of ell steps down, so b^ell vertices.
/// result[j] lists positions in lab.levels[level - ell] for the vertex
/// lab.levels[level][j]. Throws ModelError if some vertex has fewer than b
/// children.
std::vector<std::vector<int>> descendant_sets(const Labeling& lab, int level, int ell, int b);

/// Majority lift from height i*ell to (i+1)*ell. pm must have cap level
/// (i+1)*ell. Ties use a coin hashed from (seed, stage, sample, smallest
/// leaf of the new vertex), so the output depends only on the inputs.
PseudoLeafColoring psi_lift(const PseudoLeafColoring& in, const PartialMetric& pm, int b, int ell,
                            std::uint64_t seed);

/// Extends pm_inner (cap i*ell) with d_prime (cap ell, on the vertices at
/// height i*ell of `lab`): pairs within 2 i ell keep their value, the rest
/// get d'(u', v') + 2 i ell.
PartialMetric merge_metrics(const PartialMetric& pm_inner, const PartialMetric& d_prime, const Labeling& lab);

struct StageDiagnostic {
  int stage = 0;
  int level = 0;
  int pseudo_leaves = 0;
  /// Attenuation assumed for the pseudo-leaves (exact lift gain in the
  /// fixed regime, the floor eta_min in the general one).
  double eta = 0;
  /// Pairs whose distance this stage resolved below the new cap.
  int pairs_resolved = 0;
  FourPointDiagnostics four_point;
};

struct ReconstructionResult {
  DistanceMatrix metric;
  std::vector<StageDiagnostic> stages;
};

/// Supplies correlations between the current pseudo-leaves and performs
/// lifts. Lets the pipelines run on samples or on exact model values.
class CorrelationSource {
 public:
  virtual ~CorrelationSource() = default;
  virtual CorrelationTable correlations() const = 0;
  /// Replace the pseudo-leaves by new ones; groups[j] lists the current
  /// positions voting for new vertex j, keys[j] is its smallest leaf.
  virtual void lift(const std::vector<std::vector<int>>& groups, const std::vector<int>& keys, int stage) = 0;
  /// Exact sources report failures as inconsistent input.
  virtual bool exact() const = 0;
};

/// Samples over the leaves; lifts by majority with hashed tie coins.
std::unique_ptr<CorrelationSource> sample_source(const SampleMatrix& leaves, std::uint64_t seed);

/// The model itself: correlations are the products of lift gains and path
/// fidelities, lift gains come from exact_maj_gain on the chosen gadget.
std::unique_ptr<CorrelationSource> exact_source(const BalancedTree& tree, const EdgeParams& params);

/// Runs the staged reconstruction of the selected regime on any source.
/// Throws ReconstructionError naming the stage and pair on failure.
ReconstructionResult reconstruct(CorrelationSource& source, int n, const ReconstructionConfig& config);

/// Fixed regime on leaf samples: interval classification with the exact
/// homogeneous lift gain as eta at each stage.
ReconstructionResult reconstruct_fixed(const SampleMatrix& leaves, const ReconstructionConfig& config);

/// General regime on leaf samples: four-point recovery with eta_min = 1 on
/// the leaves and min{1, g^(i ell)} beta at stage i.
ReconstructionResult reconstruct_general(const SampleMatrix& leaves, const ReconstructionConfig& config);

/// Lift gains m_0 = leaf_eta, m_(i+1) = homogeneous_gain(b, ell, theta, m_i).
std::vector<double> fixed_stage_gains(const ReconstructionConfig& config, int stages);

/// (2 ln n + ln 2 - ln delta) / c_hat, times g^(-8q) with q = log_b n when
/// g < 1.
double sample_complexity(int n, double delta, const ReconstructionConfig& config, double c_hat);

/// eta0^4 theta^(4 ell) (1 - theta^2)^2 / 8.
double theoretical_c_fixed(double eta0, double theta, int ell);
/// theta_min^(8 ell + 8) beta^8 (1 - theta_max)^2 / 2048.
double theoretical_c_general(double theta_min, double theta_max, double beta, int ell);

/// Baseline for a known regular-star shape: `depth` levels, b children per
/// internal node below the root. Groups of b clusters are merged greedily by
/// average correlation, level by level; whatever remains joins the root.
/// Returns the implied leaf distance matrix.
DistanceMatrix reconstruct_linkage(const CorrelationTable& table, int b, int depth);

/// Per-stage diagnostics as one JSON object per line.
std::string stage_log_jsonl(const ReconstructionResult& result);

}  // namespace cfn
