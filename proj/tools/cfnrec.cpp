// Command-line front end: simulate data, reconstruct trees, run sweeps and
// the exact checks. Data goes to --out; progress and timing go to stderr.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <json.hpp>

#include "cfn/distance.hpp"
#include "cfn/error.hpp"
#include "cfn/harness.hpp"
#include "cfn/info.hpp"
#include "cfn/majority.hpp"
#include "cfn/newick.hpp"
#include "cfn/sample_io.hpp"
#include "cfn/sampling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cfn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitExperiment = 1;
constexpr int kExitUsage = 2;

/// Raised for bad flags or unreadable inputs; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out = ".";
  std::string format = "json";
  // Overrides of config keys.
  std::optional<int> b, trials, ell;
  std::optional<double> theta, theta_max, g, eta;
  std::vector<int> q;
  std::vector<std::size_t> k;
  std::optional<std::string> method;
  // reconstruct
  std::string samples_path, tree_path;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig load_config(const Options& o, const std::string& kind, bool needs_seed = true) {
  json j = json::object();
  if (!o.config_path.empty()) {
    try {
      j = json::parse(read_file(o.config_path));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0, e.byte);
    }
  }
  j["kind"] = kind;
  if (o.seed) j["seed"] = *o.seed;
  if (!needs_seed && !j.contains("seed")) j["seed"] = 0;
  if (o.b) j["b"] = *o.b;
  if (!o.q.empty()) j["q"] = o.q;
  if (o.trials) j["trials"] = *o.trials;
  if (o.ell) j["ell"] = *o.ell;
  if (o.theta) j["theta"] = *o.theta;
  if (o.theta_max) {
    if (!o.theta) throw UsageError("--theta-max needs --theta");
    j["theta"] = {{"min", *o.theta}, {"max", *o.theta_max}};
  }
  if (o.g) j["g"] = *o.g;
  if (o.eta) j["eta"] = *o.eta;
  if (!o.k.empty()) j["k"] = o.k;
  if (o.method) j["method"] = *o.method;
  j["threads"] = o.threads;
  j["out"] = o.out;
  try {
    return config_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::ofstream open_out(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  std::ofstream f(fs::path(o.out) / name, std::ios::binary);
  if (!f) throw UsageError("cannot write " + (fs::path(o.out) / name).string());
  return f;
}

void write_json(const Options& o, const std::string& name, const json& j) { open_out(o, name) << j.dump(2) << '\n'; }

BalancedTree tree_for(const ExperimentConfig& c, EdgeParams& params) {
  const int q = c.q.front();
  BalancedTree tree = random_uniform_topology(c.b, q, derive_seed(c.seed, 0));
  params = c.theta_lo == c.theta_hi ? EdgeParams::uniform(tree, c.theta_lo, c.eta)
                                    : EdgeParams::random_interval(tree, c.theta_lo, c.theta_hi, derive_seed(c.seed, 1), c.eta);
  params.root_plus = c.root_plus;
  return tree;
}

int cmd_simulate(const Options& o) {
  const ExperimentConfig c = load_config(o, "simulate");
  EdgeParams params;
  const BalancedTree tree = tree_for(c, params);
  const SampleMatrix s = sample_cfn_leaves(tree, params, c.k.front(), derive_seed(c.seed, 2));
  open_out(o, "tree.nwk") << to_newick(tree, params) << '\n';
  {
    auto f = open_out(o, "samples.txt");
    write_samples_text(f, s);
  }
  {
    auto f = open_out(o, "samples.cfnb");
    write_samples_binary(f, s);
  }
  auto f = open_out(o, "correlations.csv");
  write_correlations_csv(f, correlations(s));
  return kExitOk;
}

SampleMatrix load_samples(const std::string& path) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  if (bytes.rfind("CFNB", 0) == 0) return read_samples_binary(in);
  return read_samples_text(in);
}

int cmd_reconstruct(const Options& o) {
  const ExperimentConfig c = load_config(o, "reconstruct");
  if (o.samples_path.empty()) throw UsageError("reconstruct needs --samples");
  const SampleMatrix s = load_samples(o.samples_path);
  std::optional<NewickTree> truth;
  if (!o.tree_path.empty()) truth = parse_newick(read_file(o.tree_path));

  json report{{"config", to_json(c)}, {"samples", o.samples_path}, {"k", s.k()}, {"n", s.width()}};
  DistanceMatrix metric;
  int status = kExitOk;
  if (c.method == Method::kLinkage) {
    int depth = 0;
    for (int n = static_cast<int>(s.width()); n > c.b + 1; n /= c.b) ++depth;
    metric = reconstruct_linkage(correlations(s), c.b, depth + 1);
  } else {
    const ReconstructionConfig rc = c.reconstruction();
    try {
      const ReconstructionResult r = c.method == Method::kFixed ? reconstruct_fixed(s, rc) : reconstruct_general(s, rc);
      metric = r.metric;
      open_out(o, "stages.jsonl") << stage_log_jsonl(r);
    } catch (const ReconstructionError& e) {
      report["failure"] = {{"stage", e.stage()}, {"u", e.u()}, {"v", e.v()}, {"kind", to_string(e.kind())}, {"reason", e.what()}};
      status = kExitExperiment;
    }
  }
  if (status == kExitOk) {
    auto f = open_out(o, "metric.csv");
    write_metric_csv(f, PartialMetric{metric.max_value() / 2, metric});
    if (truth) {
      const bool ok = metric == pairwise_leaf_distances(truth->tree);
      report["matches_tree"] = ok;
      if (!ok) status = kExitExperiment;
    }
  }
  write_json(o, "reconstruct.json", report);
  return status;
}

int cmd_sweep(const Options& o) {
  const ExperimentConfig c = load_config(o, "sweep");
  const auto start = std::chrono::steady_clock::now();
  SweepReport r;
  try {
    r = run_sweep(c, [](const PointReport& p) {
      std::fprintf(stderr, "q=%d n=%d k=%zu success=%d/%d\n", p.q, p.n, p.k, p.successes, p.trials);
    });
  } catch (const LevelSearchError& e) {
    std::fprintf(stderr, "rejected: %s\n", e.what());
    return kExitExperiment;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "wall time %.2f s\n", secs);
  if (o.format == "csv") {
    auto p = open_out(o, "points.csv");
    write_points_csv(p, r);
    auto k = open_out(o, "k_star.csv");
    write_k_star_csv(k, r);
  } else {
    write_json(o, "sweep.json", to_json(r));
  }
  return kExitOk;
}

int cmd_majority_gain(const Options& o) {
  const ExperimentConfig c = load_config(o, "majority-gain", false);
  int ell = c.ell;
  if (ell == 0) {
    try {
      ell = choose_level(c.b, c.theta_lo, c.g);
    } catch (const LevelSearchError& e) {
      std::fprintf(stderr, "rejected: %s\n", e.what());
      return kExitExperiment;
    }
  }
  const GainConstants gc = estimate_beta(c.b, ell, c.theta_lo, default_eta_grid(), 0.9, c.g);
  std::vector<double> etas;
  for (int i = 1; i <= 20; ++i) etas.push_back(i / 20.0);
  if (o.format == "csv") {
    auto f = open_out(o, "majority_gain.csv");
    f << "eta,gain\n";
    char buf[96];
    for (double e : etas) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", e, homogeneous_gain(c.b, ell, c.theta_lo, e));
      f << buf;
    }
    return kExitOk;
  }
  json rows = json::array();
  for (double e : etas) rows.push_back({{"eta", e}, {"gain", homogeneous_gain(c.b, ell, c.theta_lo, e)}});
  write_json(o, "majority_gain.json",
             {{"b", c.b}, {"theta", c.theta_lo}, {"g", c.g}, {"ell", ell}, {"alpha", gc.alpha}, {"beta", gc.beta},
              {"crossing", gc.crossing}, {"far_lower_bound", maj_far_lower_bound(c.b, ell, c.theta_lo, 1.0)},
              {"gain", rows}});
  return kExitOk;
}

int cmd_info_check(const Options& o) {
  const ExperimentConfig c = load_config(o, "info-check");
  bool all = true;
  json mi = json::array();
  for (int b = 2; b <= 16; ++b)
    for (int q = 1; std::pow(b, q) <= 16; ++q)
      for (int i = 0; i < 20; ++i) {
        const double theta = i / 19.0;
        const MiBoundCheck m = mi_root_boundary_check(b, q, theta);
        all &= m.pass;
        mi.push_back({{"b", b}, {"q", q}, {"theta", theta}, {"mi", m.mi}, {"bound", m.bound}, {"pass", m.pass}});
      }
  json topo = json::array();
  for (auto [b, ell] : {std::pair{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}}) {
    const BigInt formula = n_topologies(b, ell);
    const std::int64_t count = enumerate_topologies(b, ell);
    const bool pass = formula == count;
    all &= pass;
    topo.push_back({{"b", b}, {"ell", ell}, {"formula", formula.str()}, {"enumerated", count}, {"pass", pass}});
  }
  Rng rng(derive_seed(c.seed, 7));
  int fano_fail = 0;
  for (int i = 0; i < 1000; ++i) {
    const int m = 2 + static_cast<int>(rng.below(4));
    const ExactDistribution j = random_joint(m, 2 + static_cast<int>(rng.below(4)), rng);
    if (map_success(j) > fano_max_success(std::clamp(conditional_entropy(j), 0.0, std::log2(m)), m) + 1e-9) ++fano_fail;
  }
  all &= fano_fail == 0;
  json bounds = json::array();
  const double theta = c.theta_lo;
  if (c.b * theta * theta < 1) {
    for (int q : c.q) {
      if (q < 2) continue;
      // ell = 1 is vacuous on its own, so the bound falls back to the default level.
      const int ell = c.ell > 0 ? std::min(c.ell, q - 1) : 1;
      const LowerBound lb = lower_bound_delta(c.b, theta, q, static_cast<double>(c.k.front()), ell);
      bounds.push_back({{"q", q}, {"k", c.k.front()}, {"default_ell", lb.default_ell}, {"clamped", lb.default_ell_clamped},
                        {"bound", std::isfinite(lb.value) ? json(lb.value) : json("inf")}});
    }
  }
  write_json(o, "info_check.json",
             {{"mi_bound", mi}, {"topologies", topo}, {"fano_violations", fano_fail}, {"lower_bound", bounds}, {"pass", all}});
  return all ? kExitOk : kExitExperiment;
}

int cmd_calibrate(const Options& o) {
  const ExperimentConfig c = load_config(o, "calibrate");
  Constants k;
  try {
    k = calibrate(c);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "rejected: %s\n", e.what());
    return kExitExperiment;
  } catch (const LevelSearchError& e) {
    std::fprintf(stderr, "rejected: %s\n", e.what());
    return kExitExperiment;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitExperiment;
  }
  write_json(o, "constants.json", to_json(k));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CFN tree simulation, reconstruction and exact checks"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* s) {
    s->add_option("--config", o.config_path, "JSON experiment config");
    s->add_option("--seed", o.seed, "master seed (overrides the config)");
    s->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    s->add_option("--out", o.out, "output directory");
    s->add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--b", o.b, "minimum branching");
    s->add_option("--q", o.q, "subtree levels (n = (b+1) b^q), comma separated")->delimiter(',');
    s->add_option("--theta", o.theta, "edge fidelity (lower end with --theta-max)");
    s->add_option("--theta-max", o.theta_max, "upper end of a fidelity interval");
    s->add_option("--eta", o.eta, "leaf attenuation");
    s->add_option("--g", o.g, "decay base");
    s->add_option("--k", o.k, "samples per trial, comma separated")->delimiter(',');
    s->add_option("--trials", o.trials, "trials per grid point");
    s->add_option("--ell", o.ell, "levels per stage (0 = automatic)");
    s->add_option("--method", o.method, "fixed, general or linkage");
  };
  std::map<std::string, int (*)(const Options&)> handlers{
      {"simulate", cmd_simulate},   {"reconstruct", cmd_reconstruct},   {"sweep", cmd_sweep},
      {"majority-gain", cmd_majority_gain}, {"info-check", cmd_info_check}, {"calibrate", cmd_calibrate}};
  const std::map<std::string, std::string> help{
      {"simulate", "sample a random tree and write tree, samples and correlations"},
      {"reconstruct", "reconstruct the tree from a sample file"},
      {"sweep", "success rates over a (q, k) grid and k* per q"},
      {"majority-gain", "exact majority gain, level and gain floor"},
      {"info-check", "exact information bounds, topology counts, Fano"},
      {"calibrate", "fit operational constants and write constants.json"}};
  for (const auto& [name, _] : handlers) {
    CLI::App* s = app.add_subcommand(name, help.at(name));
    common(s);
    if (name == "reconstruct") {
      s->add_option("--samples", o.samples_path, "text or binary sample file")->required();
      s->add_option("--tree", o.tree_path, "Newick tree to compare against");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  try {
    for (const auto& [name, fn] : handlers)
      if (app.got_subcommand(name)) return fn(o);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitUsage;
  } catch (const LevelSearchError& e) {
    std::fprintf(stderr, "rejected: %s\n", e.what());
    return kExitExperiment;
  } catch (const ModelError& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return kExitExperiment;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitExperiment;
  }
  return kExitUsage;
}
