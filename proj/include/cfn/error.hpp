#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfn {

/// Malformed input file. Carries a 1-based line and column (or a byte
/// offset for binary formats, with line 0).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what + " (at byte offset " + std::to_string(column) + ")";
    return what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
  }
  std::size_t line_, column_;
};

}  // namespace cfn

namespace cfn {

enum class FailureKind {
  /// Noisy input produced an outcome no balanced tree can have; more
  /// samples would likely fix it.
  kInsufficientSamples,
  /// The same failure on exact (noise-free) input, which points at the
  /// input model or the code rather than the sample size.
  kInconsistentInput,
};

/// A reconstruction stage could not produce a consistent metric. Names the
/// first offending leaf pair (leaf indices, -1 when not applicable).
class ReconstructionError : public std::runtime_error {
 public:
  ReconstructionError(const std::string& what, int stage, int u, int v, FailureKind kind)
      : std::runtime_error(what), stage_(stage), u_(u), v_(v), kind_(kind) {}

  int stage() const { return stage_; }
  int u() const { return u_; }
  int v() const { return v_; }
  FailureKind kind() const { return kind_; }

 private:
  int stage_, u_, v_;
  FailureKind kind_;
};

inline const char* to_string(FailureKind kind) {
  return kind == FailureKind::kInsufficientSamples ? "insufficient_samples" : "inconsistent_input";
}

}  // namespace cfn
