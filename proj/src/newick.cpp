#include "cfn/newick.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string_view>

#include "cfn/error.hpp"

namespace cfn {

namespace {

std::string number(double x) {
  if (std::isinf(x)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void emit(const BalancedTree& tree, const EdgeParams* params, int v, std::string& out) {
  const auto& ch = tree.children(v);
  if (ch.empty()) {
    out += std::to_string(tree.leaf_index(v) + 1);
  } else {
    out += '(';
    for (std::size_t i = 0; i < ch.size(); ++i) {
      if (i) out += ',';
      emit(tree, params, ch[i], out);
    }
    out += ')';
  }
  if (v == tree.root()) return;
  out += ':';
  out += params ? number(-std::log(params->theta[v])) : "1";
  if (params && tree.is_leaf(v)) {
    const double eta = params->eta[tree.leaf_index(v)];
    if (eta != 1.0) out += "[&eta=" + number(eta) + "]";
  }
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NewickTree run() {
    skip_space();
    node(0);
    skip_space();
    expect(';');
    skip_space();
    if (pos_ != s_.size()) fail("trailing characters after ';'");

    std::vector<int> leaf_nodes(labels_.size(), -1);
    for (std::size_t v = 0; v < labels_.size(); ++v) {
      const long lab = labels_[v];
      if (lab == 0) continue;
      if (lab < 1 || lab > static_cast<long>(leaf_count_)) {
        throw ParseError("leaf label " + std::to_string(lab) + " outside 1.." + std::to_string(leaf_count_), 1, 1);
      }
      if (leaf_nodes[lab - 1] >= 0) throw ParseError("duplicate leaf label " + std::to_string(lab), 1, 1);
      leaf_nodes[lab - 1] = static_cast<int>(v);
    }
    leaf_nodes.resize(leaf_count_);
    NewickTree out{BalancedTree::from_parents(parent_, leaf_nodes), {}};
    out.params.theta = theta_;
    out.params.eta.resize(leaf_count_);
    for (std::size_t i = 0; i < leaf_count_; ++i) out.params.eta[i] = eta_[leaf_nodes[i]];
    out.params.validate(out.tree);
    return out;
  }

 private:
  // Parses one subtree whose parent is `up`; returns its node id.
  int node(int up) {
    const int v = static_cast<int>(parent_.size());
    parent_.push_back(v == 0 ? 0 : up);
    labels_.push_back(0);
    theta_.push_back(1.0);
    eta_.push_back(1.0);
    skip_space();
    if (peek() == '(') {
      ++pos_;
      for (;;) {
        node(v);
        skip_space();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        expect(')');
        break;
      }
      skip_space();
      name();  // internal names are accepted and ignored
    } else {
      const std::size_t at = pos_;
      const std::string label = name();
      if (label.empty()) fail("expected a leaf label");
      char* end = nullptr;
      const long x = std::strtol(label.c_str(), &end, 10);
      if (*end != '\0' || x <= 0) fail_at("leaf label '" + label + "' is not a positive integer", at);
      labels_[v] = x;
      ++leaf_count_;
    }
    skip_space();
    if (peek() == ':') {
      ++pos_;
      skip_space();
      const std::size_t at = pos_;
      const double len = real();
      if (!(len >= 0)) fail_at("negative or invalid branch length", at);
      theta_[v] = std::exp(-len);
    }
    skip_space();
    while (peek() == '[') comment(v);
    return v;
  }

  void comment(int v) {
    const std::size_t at = pos_;
    const std::size_t close = s_.find(']', pos_);
    if (close == std::string::npos) fail_at("unterminated comment", at);
    const std::string body = s_.substr(pos_ + 1, close - pos_ - 1);
    pos_ = close + 1;
    skip_space();
    const std::string key = "&eta=";
    if (body.rfind(key, 0) == 0) {
      char* end = nullptr;
      const double eta = std::strtod(body.c_str() + key.size(), &end);
      if (*end != '\0') fail_at("malformed eta comment", at);
      eta_[v] = eta;
    }
  }

  std::string name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::string_view("(),:;[ \t\r\n").find(s_[pos_]) == std::string_view::npos) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  double real() {
    const std::string tok = name();
    if (tok == "inf") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0') fail("malformed number '" + tok + "'");
    return x;
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const { fail_at(what, pos_); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("newick: " + what, line, col);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  std::vector<int> parent_;
  std::vector<long> labels_;
  std::vector<double> theta_;
  std::vector<double> eta_;
  std::size_t leaf_count_ = 0;
};

}  // namespace

std::string to_newick(const BalancedTree& tree, const EdgeParams& params) {
  params.validate(tree);
  std::string out;
  emit(tree, &params, tree.root(), out);
  return out + ";";
}

std::string to_newick(const BalancedTree& tree) {
  std::string out;
  emit(tree, nullptr, tree.root(), out);
  return out + ";";
}

NewickTree parse_newick(const std::string& text) { return Parser(text).run(); }

}  // namespace cfn
