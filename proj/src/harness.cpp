#include "cfn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "cfn/error.hpp"
#include "cfn/majority.hpp"
#include "cfn/rng.hpp"
#include "cfn/sampling.hpp"

namespace cfn {

using nlohmann::json;

const char* to_string(Method m) {
  switch (m) {
    case Method::kFixed: return "fixed";
    case Method::kGeneral: return "general";
    case Method::kLinkage: return "linkage";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "fixed") return Method::kFixed;
  if (s == "general") return Method::kGeneral;
  if (s == "linkage") return Method::kLinkage;
  throw std::invalid_argument("unknown method '" + s + "' (fixed, general, linkage)");
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kinds{"simulate", "reconstruct", "sweep", "majority-gain", "info-check", "calibrate"};
  if (!kinds.count(kind)) throw std::invalid_argument("unknown experiment kind '" + kind + "'");
  if (b < 2) throw std::invalid_argument("b must be at least 2");
  if (q.empty()) throw std::invalid_argument("q grid is empty");
  for (int x : q)
    if (x < 0 || leaf_count(b, x) > 100000) throw std::invalid_argument("q out of range");
  if (!(0 <= theta_lo && theta_lo <= theta_hi && theta_hi <= 1)) throw std::invalid_argument("need 0 <= theta_lo <= theta_hi <= 1");
  if (!(0 < eta && eta <= 1)) throw std::invalid_argument("eta must be in (0,1]");
  if (!(0 <= root_plus && root_plus <= 1)) throw std::invalid_argument("root_plus must be in [0,1]");
  if (ell < 0) throw std::invalid_argument("ell must be non-negative");
  if (!(0 <= beta && beta <= 1)) throw std::invalid_argument("beta must be in [0,1]");
  if (!(0 < g && g <= 1)) throw std::invalid_argument("g must be in (0,1]");
  if (k.empty()) throw std::invalid_argument("k grid is empty");
  for (std::size_t x : k)
    if (x == 0) throw std::invalid_argument("k must be positive");
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  if (!(0 < target && target <= 1)) throw std::invalid_argument("target must be in (0,1]");
  if (threads < 1) throw std::invalid_argument("threads must be positive");
  if (method == Method::kFixed && theta_lo != theta_hi) throw std::invalid_argument("the fixed method needs a constant theta");
}

ReconstructionConfig ExperimentConfig::reconstruction() const {
  ReconstructionConfig rc;
  if (method == Method::kLinkage) return rc;
  if (method == Method::kFixed) {
    rc = ReconstructionConfig::fixed(b, theta_lo, seed);
  } else {
    rc = ReconstructionConfig::general(b, theta_lo, theta_hi, g, seed);
  }
  if (ell > 0 && ell != rc.ell) {
    rc.ell = ell;
    rc.beta = estimate_beta(b, ell, theta_lo, default_eta_grid(), 0.9, rc.g).beta;
  }
  if (beta > 0) rc.beta = beta;
  rc.leaf_eta = eta;
  rc.validate();
  return rc;
}

ExperimentConfig config_from_json(const json& j) {
  static const std::set<std::string> keys{"kind", "b", "q", "theta", "eta", "root_plus", "method", "ell", "beta",
                                          "g", "k", "trials", "seed", "target", "threads", "out"};
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) throw std::invalid_argument("unknown config key '" + it.key() + "'");
  if (!j.contains("seed")) throw std::invalid_argument("config needs an explicit seed");
  ExperimentConfig c;
  try {
    c.kind = j.value("kind", c.kind);
    c.b = j.value("b", c.b);
    if (j.contains("q")) c.q = j["q"].is_array() ? j["q"].get<std::vector<int>>() : std::vector<int>{j["q"].get<int>()};
    if (j.contains("theta")) {
      const json& t = j["theta"];
      if (t.is_number()) {
        c.theta_lo = c.theta_hi = t.get<double>();
      } else {
        c.theta_lo = t.at("min").get<double>();
        c.theta_hi = t.at("max").get<double>();
      }
    }
    c.eta = j.value("eta", c.eta);
    c.root_plus = j.value("root_plus", c.root_plus);
    if (j.contains("method")) c.method = method_from_string(j["method"].get<std::string>());
    c.ell = j.value("ell", c.ell);
    c.beta = j.value("beta", c.beta);
    c.g = j.value("g", c.g);
    if (j.contains("k")) c.k = j["k"].is_array() ? j["k"].get<std::vector<std::size_t>>() : std::vector<std::size_t>{j["k"].get<std::size_t>()};
    c.trials = j.value("trials", c.trials);
    c.seed = j["seed"].get<std::uint64_t>();
    c.target = j.value("target", c.target);
    c.threads = j.value("threads", c.threads);
    c.out = j.value("out", c.out);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json theta = c.theta_lo == c.theta_hi ? json(c.theta_lo) : json{{"min", c.theta_lo}, {"max", c.theta_hi}};
  return json{{"kind", c.kind}, {"b", c.b}, {"q", c.q}, {"theta", theta}, {"eta", c.eta}, {"root_plus", c.root_plus},
              {"method", to_string(c.method)}, {"ell", c.ell}, {"beta", c.beta}, {"g", c.g}, {"k", c.k},
              {"trials", c.trials}, {"seed", c.seed}, {"target", c.target}};
}

std::pair<double, double> wilson_interval(int successes, int trials, double level) {
  if (trials <= 0) return {0.0, 1.0};
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2);
  const double n = trials, p = successes / n, z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

TrialOutcome run_trial(const ExperimentConfig& config, const ReconstructionConfig& rc, int q, std::size_t k, int trial) {
  const std::uint64_t base = derive_seed(config.seed, static_cast<std::uint64_t>(q));
  const auto t = static_cast<std::uint64_t>(trial);
  const BalancedTree tree = random_uniform_topology(config.b, q, derive_seed(base, t, 0));
  EdgeParams params = config.theta_lo == config.theta_hi
                          ? EdgeParams::uniform(tree, config.theta_lo, config.eta)
                          : EdgeParams::random_interval(tree, config.theta_lo, config.theta_hi, derive_seed(base, t, 1), config.eta);
  params.root_plus = config.root_plus;
  const SampleMatrix samples = sample_cfn_leaves(tree, params, k, derive_seed(base, t, 2));

  TrialOutcome out;
  out.trial = trial;
  const DistanceMatrix truth = pairwise_leaf_distances(tree);
  if (config.method == Method::kLinkage) {
    out.stages = 1;
    out.success = reconstruct_linkage(correlations(samples), config.b, q + 1) == truth;
    if (!out.success) out.failure = "wrong_topology", out.failure_stage = 0;
    return out;
  }
  ReconstructionConfig local = rc;
  local.seed = derive_seed(base, t, 3);
  try {
    const ReconstructionResult r = config.method == Method::kFixed ? reconstruct_fixed(samples, local)
                                                                   : reconstruct_general(samples, local);
    out.stages = static_cast<int>(r.stages.size());
    out.success = r.metric == truth;
    if (!out.success) out.failure = "wrong_topology", out.failure_stage = out.stages - 1;
  } catch (const ReconstructionError& e) {
    out.failure = std::string(to_string(e.kind())) + ": " + e.what();
    out.failure_stage = e.stage();
  }
  return out;
}

void parallel_for(int tasks, int threads, const std::function<void(int)>& job) {
  threads = std::max(1, std::min(threads, tasks));
  if (threads == 1) {
    for (int i = 0; i < tasks; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < tasks;) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

PointReport run_point(const ExperimentConfig& config, const ReconstructionConfig& rc, int q, std::size_t k) {
  PointReport p;
  p.q = q;
  p.n = leaf_count(config.b, q);
  p.k = k;
  p.trials = config.trials;
  p.outcomes.resize(config.trials);
  parallel_for(config.trials, config.threads, [&](int t) { p.outcomes[t] = run_trial(config, rc, q, k, t); });
  for (const auto& o : p.outcomes) p.successes += o.success;
  p.rate = static_cast<double>(p.successes) / p.trials;
  std::tie(p.ci_lo, p.ci_hi) = wilson_interval(p.successes, p.trials);
  return p;
}

KStar k_star_of(const std::vector<PointReport>& points, double target) {
  KStar r;
  if (points.empty()) return r;
  r.q = points.front().q;
  r.n = points.front().n;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].rate < target) continue;
    r.k = points[i].k;
    r.interpolated = static_cast<double>(points[i].k);
    if (i > 0) {
      const PointReport& a = points[i - 1];
      const PointReport& b = points[i];
      const double t = (target - a.rate) / (b.rate - a.rate);
      r.interpolated = static_cast<double>(a.k) + t * static_cast<double>(b.k - a.k);
    }
    break;
  }
  return r;
}

SweepReport run_sweep(const ExperimentConfig& config, const std::function<void(const PointReport&)>& progress) {
  config.validate();
  const ReconstructionConfig rc = config.reconstruction();
  SweepReport r;
  r.config = config;
  std::vector<std::size_t> ks = config.k;
  std::sort(ks.begin(), ks.end());
  for (int q : config.q) {
    std::vector<PointReport> row;
    for (std::size_t k : ks) {
      row.push_back(run_point(config, rc, q, k));
      if (progress) progress(row.back());
    }
    KStar ks_row = k_star_of(row, config.target);
    ks_row.q = q;
    ks_row.n = leaf_count(config.b, q);
    r.k_star.push_back(ks_row);
    for (auto& p : row) r.points.push_back(std::move(p));
  }
  return r;
}

std::optional<std::size_t> search_k_star(const ExperimentConfig& config, int q, const std::vector<std::size_t>& grid,
                                         std::vector<PointReport>* visited) {
  const ReconstructionConfig rc = config.reconstruction();
  std::vector<std::size_t> ks = grid;
  std::sort(ks.begin(), ks.end());
  auto reaches = [&](std::size_t i) {
    PointReport p = run_point(config, rc, q, ks[i]);
    const bool ok = p.rate >= config.target;
    if (visited) visited->push_back(std::move(p));
    return ok;
  };
  if (ks.empty() || !reaches(ks.size() - 1)) return std::nullopt;
  std::size_t lo = 0, hi = ks.size() - 1;  // invariant: ks[hi] reaches
  if (reaches(0)) return ks[0];
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (reaches(mid) ? hi : lo) = mid;
  }
  return ks[hi];
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_linear needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

bool is_concave(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> p;
  for (std::size_t i = 0; i < x.size(); ++i) p.emplace_back(x[i], y[i]);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 2; i < p.size(); ++i) {
    const double s1 = (p[i - 1].second - p[i - 2].second) / (p[i - 1].first - p[i - 2].first);
    const double s2 = (p[i].second - p[i - 1].second) / (p[i].first - p[i - 1].first);
    if (s2 > s1 + 1e-12) return false;
  }
  return true;
}

Constants calibrate(const ExperimentConfig& config) {
  config.validate();
  if (config.b * config.theta_lo * config.theta_lo <= 1) {
    throw std::invalid_argument("calibration needs b theta^2 > 1");
  }
  Constants c;
  c.b = config.b;
  c.theta = config.theta_lo;
  c.method = config.method;
  const ReconstructionConfig rc = config.reconstruction();
  c.ell = rc.ell;
  const GainConstants gc = estimate_beta(config.b, c.ell, config.theta_lo, default_eta_grid(), 0.9, rc.g);
  c.beta = rc.beta;
  c.alpha = gc.alpha;

  const int q = *std::max_element(config.q.begin(), config.q.end());
  const double n = leaf_count(config.b, q);
  const double intercept = std::log(2 * n * n);
  double c_hat = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> ks = config.k;
  std::sort(ks.begin(), ks.end());
  for (std::size_t k : ks) {
    const PointReport p = run_point(config, rc, q, k);
    const double fail = 1.0 - p.rate;
    c.samples.emplace_back(k, fail);
    if (fail <= 0) continue;
    c_hat = std::min(c_hat, (intercept - std::log(fail)) / static_cast<double>(k));
  }
  if (!std::isfinite(c_hat)) throw std::runtime_error("calibration: no k in the grid gave a nonzero failure rate");
  c.c_hat = c_hat;
  return c;
}

json to_json(const Constants& c) {
  json samples = json::array();
  for (const auto& [k, f] : c.samples) samples.push_back({{"k", k}, {"failure_rate", f}});
  return json{{"version", c.version}, {"b", c.b}, {"theta", c.theta}, {"method", to_string(c.method)},
              {"ell", c.ell}, {"beta", c.beta}, {"alpha", c.alpha}, {"c_hat", c.c_hat}, {"samples", samples}};
}

Constants constants_from_json(const json& j) {
  Constants c;
  try {
    c.version = j.at("version").get<int>();
    if (c.version != 1) throw std::invalid_argument("unsupported constants version " + std::to_string(c.version));
    c.b = j.at("b").get<int>();
    c.theta = j.at("theta").get<double>();
    c.method = method_from_string(j.at("method").get<std::string>());
    c.ell = j.at("ell").get<int>();
    c.beta = j.at("beta").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.c_hat = j.at("c_hat").get<double>();
    for (const auto& s : j.value("samples", json::array()))
      c.samples.emplace_back(s.at("k").get<std::size_t>(), s.at("failure_rate").get<double>());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("constants: ") + e.what());
  }
  return c;
}

json to_json(const SweepReport& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    json trials = json::array();
    for (const auto& o : p.outcomes) {
      json t{{"trial", o.trial}, {"success", o.success}, {"stages", o.stages}};
      if (!o.success) t["failure"] = {{"stage", o.failure_stage}, {"reason", o.failure}};
      trials.push_back(std::move(t));
    }
    points.push_back({{"q", p.q}, {"n", p.n}, {"k", p.k}, {"successes", p.successes}, {"trials", p.trials},
                      {"rate", p.rate}, {"wilson90", {p.ci_lo, p.ci_hi}}, {"outcomes", std::move(trials)}});
  }
  json ks = json::array();
  for (const auto& k : r.k_star)
    ks.push_back({{"q", k.q}, {"n", k.n}, {"k_star", k.k ? json(*k.k) : json(nullptr)},
                  {"k_star_interpolated", k.interpolated ? json(*k.interpolated) : json(nullptr)}});
  return json{{"config", to_json(r.config)}, {"points", std::move(points)}, {"k_star", std::move(ks)}};
}

void write_points_csv(std::ostream& out, const SweepReport& r) {
  out << "q,n,k,successes,trials,rate,ci_lo,ci_hi\n";
  char buf[256];
  for (const auto& p : r.points) {
    std::snprintf(buf, sizeof buf, "%d,%d,%zu,%d,%d,%.17g,%.17g,%.17g\n", p.q, p.n, p.k, p.successes, p.trials, p.rate,
                  p.ci_lo, p.ci_hi);
    out << buf;
  }
}

void write_k_star_csv(std::ostream& out, const SweepReport& r) {
  out << "q,n,k_star,k_star_interpolated\n";
  char buf[64];
  for (const auto& k : r.k_star) {
    out << k.q << ',' << k.n << ',';
    if (k.k) out << *k.k;
    out << ',';
    if (k.interpolated) {
      std::snprintf(buf, sizeof buf, "%.17g", *k.interpolated);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace cfn
