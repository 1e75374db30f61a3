#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cfn {

/// k independent +-1 colorings of an ordered vertex list, stored row-major
/// as int8. Vertex ids are node ids for full-tree colorings and leaf
/// indices (or pseudo-leaf ids) for boundary colorings.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(std::size_t k, std::vector<int> vertices)
      : k_(k), vertices_(std::move(vertices)), values_(k_ * vertices_.size(), 1) {}

  std::size_t k() const { return k_; }
  std::size_t width() const { return vertices_.size(); }
  const std::vector<int>& vertices() const { return vertices_; }

  std::int8_t at(std::size_t t, std::size_t j) const { return values_[t * width() + j]; }
  void set(std::size_t t, std::size_t j, int value) { values_[t * width() + j] = static_cast<std::int8_t>(value); }
  const std::int8_t* row(std::size_t t) const { return values_.data() + t * width(); }
  std::int8_t* row(std::size_t t) { return values_.data() + t * width(); }
  const std::vector<std::int8_t>& data() const { return values_; }

  /// New matrix over the given column positions, in that order.
  SampleMatrix select_columns(const std::vector<int>& columns) const;
  /// First `count` rows.
  SampleMatrix head(std::size_t count) const;

  bool operator==(const SampleMatrix&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<int> vertices_;
  std::vector<std::int8_t> values_;
};

}  // namespace cfn
