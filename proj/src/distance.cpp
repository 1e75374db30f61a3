#include "cfn/distance.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace cfn {

CorrelationTable correlations(const SampleMatrix& samples) {
  const std::size_t k = samples.k();
  if (k == 0) throw std::invalid_argument("correlations need at least one sample");
  const int n = static_cast<int>(samples.width());
  const std::size_t words = (k + 63) / 64;
  std::vector<std::uint64_t> bits(static_cast<std::size_t>(n) * words, 0);
  for (std::size_t t = 0; t < k; ++t) {
    const std::int8_t* row = samples.row(t);
    const std::uint64_t mask = std::uint64_t{1} << (t % 64);
    for (int j = 0; j < n; ++j) {
      if (row[j] > 0) bits[static_cast<std::size_t>(j) * words + t / 64] |= mask;
    }
  }
  CorrelationTable out(n, k);
  const double inv = 1.0 / static_cast<double>(k);
  for (int u = 0; u < n; ++u) {
    const std::uint64_t* bu = &bits[static_cast<std::size_t>(u) * words];
    for (int v = u + 1; v < n; ++v) {
      const std::uint64_t* bv = &bits[static_cast<std::size_t>(v) * words];
      std::size_t differ = 0;
      for (std::size_t w = 0; w < words; ++w) differ += std::popcount(bu[w] ^ bv[w]);
      const auto agree = static_cast<long long>(k - differ);
      out.set(u, v, static_cast<double>(agree - static_cast<long long>(differ)) * inv);
    }
  }
  return out;
}

CorrelationTable exact_correlations(const BalancedTree& tree, const EdgeParams& params) {
  params.validate(tree);
  const int n = tree.leaf_count();
  CorrelationTable out(n, 0);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const int a = tree.lca(tree.leaf_node(u), tree.leaf_node(v));
      double c = params.eta[u] * params.eta[v];
      for (int x : tree.edges_up_to(tree.leaf_node(u), a)) c *= params.theta[x];
      for (int x : tree.edges_up_to(tree.leaf_node(v), a)) c *= params.theta[x];
      out.set(u, v, c);
    }
  }
  return out;
}

double dstar(double c) { return c > 0 ? -std::log(c) : kInfinity; }

FixedThetaClassifier::FixedThetaClassifier(double theta, double eta, int ell) : ell_(ell) {
  if (!(theta > 0 && theta < 1)) throw std::invalid_argument("classifier needs 0 < theta < 1");
  if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("classifier needs 0 < eta <= 1");
  if (ell < 1) throw std::invalid_argument("classifier needs ell >= 1");
  std::vector<double> alpha(ell + 2);
  for (int r = 0; r <= ell + 1; ++r) alpha[r] = eta * eta * std::pow(theta, 2 * r);
  for (int r = 1; r <= ell; ++r) lower_.push_back(0.5 * (alpha[r + 1] + alpha[r]));
}

int FixedThetaClassifier::classify(double c) const {
  for (int r = 1; r <= ell_; ++r) {
    if (c > lower_[r - 1]) return 2 * r;
  }
  return far();
}

int classify_distance_fixed_theta(double c, double theta, double eta, int ell) {
  return FixedThetaClassifier(theta, eta, ell).classify(c);
}

double hoeffding_tail(double k, double a) {
  if (!(k >= 1) || !(a >= 0)) throw std::invalid_argument("hoeffding_tail needs k >= 1 and a >= 0");
  return 2.0 * std::exp(-a * a / (2.0 * k));
}

double classifier_error_bound(double k, double theta, double eta, int ell) {
  const double s = 1.0 - theta * theta;
  return 2.0 * std::exp(-k * std::pow(eta, 4) * std::pow(theta, 4 * ell) * s * s / 8.0);
}

void write_correlations_csv(std::ostream& out, const CorrelationTable& table) {
  out << "u,v,c\n";
  char buf[64];
  for (int u = 0; u < table.size(); ++u) {
    for (int v = u + 1; v < table.size(); ++v) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", u + 1, v + 1, table(u, v));
      out << buf;
    }
  }
}

}  // namespace cfn
