#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sirenv/error.hpp"
#include "sirenv/rng.hpp"

namespace sirenv {

// Union by size with path halving.
class DisjointSet {
 public:
  explicit DisjointSet(std::uint64_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }

  std::uint32_t find(std::uint32_t x) noexcept {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::uint32_t a, std::uint32_t b) noexcept {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::uint64_t component_size(std::uint32_t x) noexcept { return size_[find(x)]; }

  std::uint64_t largest() noexcept {
    std::uint64_t best = 0;
    for (std::uint32_t v = 0; v < parent_.size(); ++v)
      if (parent_[v] == v) best = std::max<std::uint64_t>(best, size_[v]);
    return best;
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

// Largest connected component of G(n, min(mu/n, 1)). Edges are enumerated by
// geometric skipping over the n(n-1)/2 pairs, so the cost is O(n + edges).
inline std::uint64_t er_giant_component(std::uint64_t n, double mu, std::uint64_t seed) {
  if (n < 1) throw error(errc::param_violation, "vertex count requires n >= 1");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw error(errc::param_violation, "mean degree requires mu >= 0");
  const double p = std::min(mu / static_cast<double>(n), 1.0);
  DisjointSet dsu(n);
  if (p > 0) {
    Stream rng(derive_key(seed, stream_tag::graph));
    const double log_miss = p < 1.0 ? std::log1p(-p) : 0.0;
    // Pairs (v, w) with w < v in row-major order.
    std::uint64_t v = 1;
    std::int64_t w = -1;
    while (v < n) {
      const double skip = p < 1.0 ? std::floor(std::log(rng.uniform()) / log_miss) : 0.0;
      if (skip > 1e18) break;
      w += 1 + static_cast<std::int64_t>(skip);
      while (v < n && w >= static_cast<std::int64_t>(v)) {
        w -= static_cast<std::int64_t>(v);
        ++v;
      }
      if (v < n) dsu.unite(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(w));
    }
  }
  return dsu.largest();
}

}  // namespace sirenv
