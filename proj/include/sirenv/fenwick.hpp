#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sirenv {

// Prefix-sum index over nonnegative weights with O(n) bulk rebuild,
// O(log n) point update and O(log n) inverse-CDF search.
class FenwickTree {
 public:
  FenwickTree() = default;
  explicit FenwickTree(std::size_t n) : leaf_(n, 0.0), tree_(n + 1, 0.0) {}

  std::size_t size() const noexcept { return leaf_.size(); }
  double leaf(std::size_t i) const noexcept { return leaf_[i]; }
  std::span<const double> leaves() const noexcept { return leaf_; }

  // Overwrite a leaf without touching the index; call rebuild() before querying.
  void assign(std::size_t i, double w) noexcept { leaf_[i] = w; }

  void rebuild() noexcept {
    const std::size_t n = leaf_.size();
    for (std::size_t k = 1; k <= n; ++k) tree_[k] = leaf_[k - 1];
    for (std::size_t k = 1; k <= n; ++k) {
      const std::size_t parent = k + (k & (~k + 1));
      if (parent <= n) tree_[parent] += tree_[k];
    }
  }

  void set(std::size_t i, double w) noexcept {
    const double delta = w - leaf_[i];
    leaf_[i] = w;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  double total() const noexcept {
    double s = 0;
    for (std::size_t k = leaf_.size(); k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }

  // Smallest index whose inclusive prefix sum exceeds target, restricted to
  // leaves with positive weight. target must lie in [0, total()).
  std::size_t find(double target) const noexcept {
    const std::size_t n = leaf_.size();
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 <= n) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step <= n && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    // Rounding can land on a zero leaf or run off the end; walk to a live one.
    if (pos >= n) pos = n - 1;
    std::size_t fwd = pos;
    while (fwd < n && leaf_[fwd] <= 0.0) ++fwd;
    if (fwd < n) return fwd;
    while (pos > 0 && leaf_[pos] <= 0.0) --pos;
    return pos;
  }

 private:
  std::vector<double> leaf_;
  std::vector<double> tree_;
};

}  // namespace sirenv
