#pragma once

#include <cstddef>
#include <vector>

namespace bassnet {

/// Binary indexed tree over non-negative per-node hazards.
///
/// Supports O(log n) point updates and O(log n) sampling of an index with
/// probability proportional to its hazard.
class HazardTree {
 public:
  HazardTree() = default;
  explicit HazardTree(std::vector<double> hazards) { assign(std::move(hazards)); }

  void assign(std::vector<double> hazards) {
    values_ = std::move(hazards);
    rebuild();
  }

  /// Recomputes the internal partial sums from the stored hazards.
  void rebuild() {
    const std::size_t n = values_.size();
    tree_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) tree_[i + 1] = values_[i];
    for (std::size_t i = 1; i <= n; ++i) {
      const std::size_t parent = i + (i & (~i + 1));
      if (parent <= n) tree_[parent] += tree_[i];
    }
    top_ = 1;
    while (top_ * 2 <= n) top_ *= 2;
  }

  void set(std::size_t index, double value) {
    const double delta = value - values_[index];
    values_[index] = value;
    for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  void add(std::size_t index, double delta) { set(index, values_[index] + delta); }

  double value(std::size_t index) const { return values_[index]; }
  std::size_t size() const noexcept { return values_.size(); }

  double total() const {
    double sum = 0.0;
    for (std::size_t i = values_.size(); i > 0; i -= i & (~i + 1)) sum += tree_[i];
    return sum;
  }

  /// Smallest index whose inclusive prefix sum exceeds `target`; clamped to the last index.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step /= 2) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    return pos < values_.size() ? pos : values_.size() - 1;
  }

 private:
  std::vector<double> values_;
  std::vector<double> tree_;
  std::size_t top_ = 1;
};

}  // namespace bassnet
