#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cfn/reconstruct.hpp"

namespace cfn {

/// How trials reconstruct: the two staged pipelines, or the known-shape
/// average-linkage baseline.
enum class Method { kFixed, kGeneral, kLinkage };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct ExperimentConfig {
  std::string kind = "sweep";
  int b = 2;
  /// Subtree levels of the regular star shape; n = (b+1) b^q.
  std::vector<int> q{2};
  double theta_lo = 0.85;
  double theta_hi = 0.85;
  double eta = 1.0;
  double root_plus = 0.5;
  Method method = Method::kFixed;
  /// 0 means choose_level / estimate_beta decide.
  int ell = 0;
  double beta = 0;
  double g = 1.0;
  std::vector<std::size_t> k{1000};
  int trials = 10;
  std::uint64_t seed = 0;
  double target = 0.9;
  int threads = 1;
  std::string out = ".";

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
  /// Reconstruction settings shared by all trials.
  ReconstructionConfig reconstruction() const;
};

/// Missing keys keep their defaults; "seed" is mandatory. Throws
/// std::invalid_argument on unknown keys or bad values.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

inline int leaf_count(int b, int q) {
  int n = b + 1;
  for (int i = 0; i < q; ++i) n *= b;
  return n;
}

struct TrialOutcome {
  int trial = 0;
  bool success = false;
  /// Empty on success; "wrong_topology" when a well-formed tree is not the true one.
  std::string failure;
  int failure_stage = -1;
  int stages = 0;
};

struct PointReport {
  int q = 0;
  int n = 0;
  std::size_t k = 0;
  int successes = 0;
  int trials = 0;
  double rate = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  std::vector<TrialOutcome> outcomes;
};

struct KStar {
  int q = 0;
  int n = 0;
  /// Smallest k in the grid reaching the target, if any.
  std::optional<std::size_t> k;
  /// Linear interpolation of the target crossing between that grid point
  /// and the one before it.
  std::optional<double> interpolated;
};

/// k* from the points of one q, sorted by k.
KStar k_star_of(const std::vector<PointReport>& points, double target);

struct SweepReport {
  ExperimentConfig config;
  std::vector<PointReport> points;
  std::vector<KStar> k_star;
};

/// Wilson score interval at two-sided level `level`.
std::pair<double, double> wilson_interval(int successes, int trials, double level = 0.9);

/// Trial `trial` at (q, k): tree, parameters and samples come from seeds
/// derived from (config.seed, q, trial), so the samples for a smaller k
/// are a prefix of those for a larger one.
TrialOutcome run_trial(const ExperimentConfig& config, const ReconstructionConfig& rc, int q, std::size_t k, int trial);

/// Runs `tasks` independent jobs on `threads` workers. Each job writes its
/// own slot, so scheduling cannot change results.
void parallel_for(int tasks, int threads, const std::function<void(int)>& job);

PointReport run_point(const ExperimentConfig& config, const ReconstructionConfig& rc, int q, std::size_t k);

/// Every (q, k) of the grid, then k* per q.
SweepReport run_sweep(const ExperimentConfig& config,
                      const std::function<void(const PointReport&)>& progress = {});

/// Smallest k in the sorted grid whose success rate reaches the target,
/// by bisection over the grid (success is treated as monotone in k).
/// Points evaluated along the way are appended to `visited`.
std::optional<std::size_t> search_k_star(const ExperimentConfig& config, int q, const std::vector<std::size_t>& grid,
                                         std::vector<PointReport>* visited = nullptr);

struct LinearFit {
  double intercept = 0;
  double slope = 0;
  double r2 = 0;
};

/// Least squares y = intercept + slope * x.
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

/// True when the piecewise-linear curve through the points (sorted by x)
/// has non-increasing slopes.
bool is_concave(const std::vector<double>& x, const std::vector<double>& y);

struct Constants {
  int version = 1;
  int b = 2;
  double theta = 0;
  Method method = Method::kFixed;
  int ell = 0;
  double beta = 0;
  double alpha = 0;
  double c_hat = 0;
  /// (k, failure rate) pairs used by the fit.
  std::vector<std::pair<std::size_t, double>> samples;
};

/// choose_level, estimate_beta, then c_hat from failure rates p(k) at the
/// largest q of the config: the largest c with p(k) <= 2 n^2 exp(-c k) at
/// every grid point with p > 0, so sample_complexity bounds what was
/// measured. Throws std::invalid_argument below the threshold.
Constants calibrate(const ExperimentConfig& config);
nlohmann::json to_json(const Constants& c);
Constants constants_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SweepReport& r);
/// One row per grid point: q,n,k,successes,trials,rate,ci_lo,ci_hi.
void write_points_csv(std::ostream& out, const SweepReport& r);
/// One row per q: q,n,k_star,k_star_interpolated (empty when not reached).
void write_k_star_csv(std::ostream& out, const SweepReport& r);

}  // namespace cfn
