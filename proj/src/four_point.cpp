#include "cfn/four_point.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "cfn/error.hpp"

namespace cfn {

DStarTable::DStarTable(const CorrelationTable& c) : n_(c.size()), d_(static_cast<std::size_t>(n_) * n_) {
  for (int u = 0; u < n_; ++u) {
    for (int v = 0; v < n_; ++v) d_[static_cast<std::size_t>(u) * n_ + v] = u == v ? 0.0 : dstar(c(u, v));
  }
}

std::array<Split, 3> splits_of(const std::array<int, 4>& q) {
  return {Split{q[0], q[1], q[2], q[3]}, Split{q[0], q[2], q[1], q[3]}, Split{q[0], q[3], q[1], q[2]}};
}

double split_weight(const DStarTable& d, const Split& s) {
  if (s.a == s.b || s.a == s.c || s.a == s.d || s.b == s.c || s.b == s.d || s.c == s.d) {
    throw std::invalid_argument("split of a degenerate quartet");
  }
  return d(s.a, s.b) + d(s.c, s.d);
}

SplitTolerance SplitTolerance::from_theta_max(double theta_max) {
  if (!(theta_max > 0 && theta_max < 1)) throw std::invalid_argument("theta_max must lie in (0,1)");
  return {(1 - theta_max) / 4, -std::log(theta_max) / 4};
}

namespace {

// Weights of the three splits of {u,v,w,x} with u v paired first.
std::array<double, 3> weights(const DStarTable& d, int u, int v, int w, int x) {
  return {d(u, v) + d(w, x), d(u, w) + d(v, x), d(u, x) + d(v, w)};
}

bool below(double a, double b, double threshold) {
  if (std::isinf(a)) return std::isinf(b);
  return a < b + threshold;
}

bool in_margin(double gap, const SplitTolerance& tol) { return gap >= 4 * tol.eps && gap < 4 * tol.eps_prime; }

}  // namespace

MinimalSplits minimal_splits(const DStarTable& d, const std::array<int, 4>& quartet, const SplitTolerance& tol) {
  if (!(tol.eps > 0 && tol.eps <= tol.eps_prime)) throw std::invalid_argument("need 0 < eps <= eps'");
  for (const Split& s : splits_of(quartet)) (void)split_weight(d, s);
  const auto w = weights(d, quartet[0], quartet[1], quartet[2], quartet[3]);
  const double lo = std::min({w[0], w[1], w[2]});
  MinimalSplits out;
  for (int i = 0; i < 3; ++i) {
    bool ok = true;
    for (int j = 0; j < 3; ++j) ok = ok && below(w[i], w[j], tol.threshold());
    if (ok) out.mask = static_cast<std::uint8_t>(out.mask | (1 << i));
    if (!std::isinf(w[i]) && in_margin(w[i] - lo, tol)) out.margin_violation = true;
  }
  return out;
}

double theta_star(double theta_min, double eta_min, int ell) {
  return std::pow(theta_min, 2 * ell + 2) * eta_min * eta_min / 2;
}

ProximityRelations build_relations(const CorrelationTable& c, double theta_star) {
  ProximityRelations rel;
  rel.theta_star = theta_star;
  rel.n = c.size();
  const std::size_t nn = static_cast<std::size_t>(rel.n) * rel.n;
  rel.r.assign(nn, 0);
  rel.r_tilde.assign(nn, 0);
  rel.r_prime.assign(nn, 0);
  for (int u = 0; u < rel.n; ++u) {
    for (int v = 0; v < rel.n; ++v) {
      const double x = c(u, v);
      const std::size_t i = static_cast<std::size_t>(u) * rel.n + v;
      rel.r[i] = x >= theta_star;
      rel.r_tilde[i] = x >= 1.5 * theta_star;
      rel.r_prime[i] = x >= 15.0 / 8.0 * theta_star;
    }
  }
  return rel;
}

FourPointResult recover_l_topology(const CorrelationTable& c, double theta_min, double theta_max, double eta_min,
                                   int ell, const FourPointOptions& options) {
  if (ell < 1) throw std::invalid_argument("four-point recovery needs ell >= 1");
  if (!(theta_min > 0 && theta_min <= theta_max)) throw std::invalid_argument("need 0 < theta_min <= theta_max");
  if (!(eta_min > 0 && eta_min <= 1)) throw std::invalid_argument("need 0 < eta_min <= 1");
  const SplitTolerance tol = SplitTolerance::from_theta_max(theta_max);
  const int n = c.size();
  const DStarTable d(c);
  FourPointResult res;
  auto& diag = res.diagnostics;

  constexpr int kUnknown = -1;
  std::vector<int> dist(static_cast<std::size_t>(n) * n, kUnknown);
  auto at = [&](int u, int v) -> int& { return dist[static_cast<std::size_t>(u) * n + v]; };
  for (int u = 0; u < n; ++u) at(u, u) = 0;

  std::vector<std::vector<int>> nbr(n);
  std::vector<std::uint8_t> pass(static_cast<std::size_t>(n) * n);
  std::vector<std::uint8_t> tested(static_cast<std::size_t>(n) * n);
  std::vector<int> outside;

  for (int r = 1; r <= ell; ++r) {
    const double threshold =
        1.5 * theta_star(theta_min, eta_min, options.rule == NeighborhoodRule::kPerLevel ? r : ell);
    for (int u = 0; u < n; ++u) {
      auto& nu = nbr[u];
      nu.clear();
      for (int x = 0; x < n; ++x) {
        if (x != u && c(u, x) >= threshold) nu.push_back(x);
      }
      if (static_cast<int>(nu.size()) > options.max_neighborhood) {
        std::stable_sort(nu.begin(), nu.end(), [&](int a, int b) { return c(u, a) > c(u, b); });
        nu.resize(options.max_neighborhood);
        std::sort(nu.begin(), nu.end());
        ++diag.truncated_neighborhoods;
      }
      diag.largest_neighborhood = std::max(diag.largest_neighborhood, static_cast<int>(nu.size()));
    }

    std::fill(pass.begin(), pass.end(), 0);
    std::fill(tested.begin(), tested.end(), 0);
    for (int u = 0; u < n; ++u) {
      for (int v : nbr[u]) {
        // Pairs already resolved lie within B_{r-1}(u).
        if (at(u, v) != kUnknown) continue;
        tested[static_cast<std::size_t>(u) * n + v] = 1;
        outside.clear();
        for (int x : nbr[u]) {
          if (at(u, x) == kUnknown && at(v, x) == kUnknown && x != v) outside.push_back(x);
        }
        bool ok = true;
        for (std::size_t i = 0; i < outside.size() && ok; ++i) {
          for (std::size_t j = i + 1; j < outside.size(); ++j) {
            const int w = outside[i], x = outside[j];
            const auto wt = weights(d, u, v, w, x);
            ++diag.quartets_evaluated;
            const double lo = std::min({wt[0], wt[1], wt[2]});
            if (!std::isinf(wt[0]) && in_margin(wt[0] - lo, tol)) ++diag.margin_violations;
            if (!below(wt[0], wt[1], tol.threshold()) || !below(wt[0], wt[2], tol.threshold())) {
              ok = false;
              if (options.audit) diag.audit.push_back({u, v, r, w, x, wt});
              break;
            }
          }
        }
        pass[static_cast<std::size_t>(u) * n + v] = ok;
      }
    }

    // Classes: leaves already resolved against each other. Falls back to
    // singletons when the resolved part is not a partition.
    std::vector<int> cls(n);
    for (int u = 0; u < n; ++u) cls[u] = u;
    if (options.class_vote && r >= 2) {
      for (int u = 0; u < n; ++u) {
        for (int x = 0; x < n; ++x) {
          if (at(u, x) != kUnknown) {
            cls[u] = x;
            break;
          }
        }
      }
      bool partition = true;
      for (int u = 0; u < n && partition; ++u) {
        for (int x = 0; x < n && partition; ++x) partition = (at(u, x) != kUnknown) == (cls[x] == cls[u]);
      }
      if (!partition) {
        for (int u = 0; u < n; ++u) cls[u] = u;
      }
    }
    std::vector<std::uint8_t> class_pass(static_cast<std::size_t>(n) * n, 0);
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (at(u, v) != kUnknown) continue;
        const std::size_t uv = static_cast<std::size_t>(u) * n + v, vu = static_cast<std::size_t>(v) * n + u;
        if (tested[uv] && tested[vu] && pass[uv] != pass[vu]) ++diag.orientation_disagreements;
        if (pass[uv] || pass[vu]) {
          class_pass[static_cast<std::size_t>(cls[u]) * n + cls[v]] = 1;
          class_pass[static_cast<std::size_t>(cls[v]) * n + cls[u]] = 1;
        }
      }
    }
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (at(u, v) == kUnknown && class_pass[static_cast<std::size_t>(cls[u]) * n + cls[v]]) {
          at(u, v) = 2 * r;
          at(v, u) = 2 * r;
        }
      }
    }
  }

  res.metric = PartialMetric{ell, DistanceMatrix(n)};
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) res.metric.dist.set(u, v, at(u, v) == kUnknown ? res.metric.cap() : at(u, v));
  }
  try {
    (void)l_labeling(res.metric);
  } catch (const LabelingError& e) {
    throw ReconstructionError(std::string("four-point recovery: ") + e.what(), -1, e.u(), e.v(),
                              c.k() == 0 ? FailureKind::kInconsistentInput : FailureKind::kInsufficientSamples);
  }
  return res;
}

FourPointResult recover_l_topology(const SampleMatrix& samples, double theta_min, double theta_max,
                                   double eta_min, int ell, const FourPointOptions& options) {
  return recover_l_topology(correlations(samples), theta_min, theta_max, eta_min, ell, options);
}

void write_metric_csv(std::ostream& out, const PartialMetric& pm) {
  out << "u,v,d\n";
  for (int u = 0; u < pm.size(); ++u) {
    for (int v = u + 1; v < pm.size(); ++v) out << u + 1 << ',' << v + 1 << ',' << pm(u, v) << '\n';
  }
}

void write_split_audit_jsonl(std::ostream& out, const std::vector<SplitAudit>& audit) {
  char buf[64];
  auto num = [&](double x) -> std::string {
    if (std::isinf(x)) return "null";
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  };
  for (const auto& a : audit) {
    out << "{\"u\":" << a.u + 1 << ",\"v\":" << a.v + 1 << ",\"r\":" << a.r << ",\"w\":" << a.w + 1
        << ",\"w_prime\":" << a.w_prime + 1 << ",\"weights\":[" << num(a.weights[0]) << ',' << num(a.weights[1])
        << ',' << num(a.weights[2]) << "]}\n";
  }
}

}  // namespace cfn
