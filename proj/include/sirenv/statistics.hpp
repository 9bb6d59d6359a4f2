#pragma once

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "sirenv/error.hpp"

namespace sirenv {

struct Interval {
  double lo = 0;
  double hi = 0;
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

// Two-sided standard normal quantile for the given confidence level.
inline double z_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw error(errc::param_violation, "confidence level must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>{}, 0.5 + 0.5 * level);
}

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials < 1) throw error(errc::param_violation, "Wilson interval requires trials >= 1");
  if (successes > trials) throw error(errc::param_violation, "Wilson interval requires successes <= trials");
  const double z = z_value(level);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
  // Exact boundaries; rounding would otherwise leave 1e-17 residues.
  if (successes == 0) out.lo = 0.0;
  if (successes == trials) out.hi = 1.0;
  out.lo = std::min(out.lo, p);
  out.hi = std::max(out.hi, p);
  return out;
}

// Sufficient statistics of a batch of final sizes. All fields are integers,
// so merging is exact, associative and commutative: the aggregate does not
// depend on how replications were split across workers.
struct Tally {
  std::uint64_t runs = 0;
  std::uint64_t failures = 0;
  std::uint64_t truncated = 0;
  std::uint64_t sum_r = 0;
  unsigned __int128 sum_r2 = 0;
  std::uint64_t exceed = 0;
  std::uint64_t exceed_sum_r = 0;
  std::uint64_t no_spread = 0;

  void add(std::uint64_t r, bool exceeds) noexcept {
    ++runs;
    sum_r += r;
    sum_r2 += static_cast<unsigned __int128>(r) * r;
    if (exceeds) {
      ++exceed;
      exceed_sum_r += r;
    }
    if (r == 1) ++no_spread;
  }

  Tally& operator+=(const Tally& o) noexcept {
    runs += o.runs;
    failures += o.failures;
    truncated += o.truncated;
    sum_r += o.sum_r;
    sum_r2 += o.sum_r2;
    exceed += o.exceed;
    exceed_sum_r += o.exceed_sum_r;
    no_spread += o.no_spread;
    return *this;
  }

  double mean() const noexcept { return runs ? static_cast<double>(sum_r) / static_cast<double>(runs) : 0.0; }

  // Unbiased sample variance, computed from the exact integer sums.
  double variance() const noexcept {
    if (runs < 2) return 0.0;
    const unsigned __int128 n = runs;
    const unsigned __int128 s = sum_r;
    const unsigned __int128 num = n * sum_r2 - s * s;
    return static_cast<double>(num) / (static_cast<double>(runs) * static_cast<double>(runs - 1));
  }

  Interval mean_interval(double level) const {
    const double half = runs ? z_value(level) * std::sqrt(variance() / static_cast<double>(runs)) : 0.0;
    return {mean() - half, mean() + half};
  }
};

}  // namespace sirenv
