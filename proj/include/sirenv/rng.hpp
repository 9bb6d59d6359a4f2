#pragma once

// Counter-based randomness. Every random quantity in the library is either a
// pure function of a key (environment values, coupling clocks) or drawn from a
// Stream whose key is derived from (master seed, purpose, indices). Nothing
// depends on thread scheduling or on the order in which keys are visited.

#include <cmath>
#include <cstdint>
#include <limits>

namespace sirenv {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ mix64(v + kGolden + (h << 6) + (h >> 2)));
}

template <typename... Ts>
constexpr std::uint64_t derive_key(std::uint64_t seed, Ts... parts) noexcept {
  std::uint64_t h = mix64(seed + kGolden);
  ((h = hash_combine(h, static_cast<std::uint64_t>(parts))), ...);
  return h;
}

// Purpose tags keep sub-streams for different roles disjoint.
enum class stream_tag : std::uint64_t {
  env = 0x656e76,
  run = 0x72756e,
  recovery_rate = 0x7869,
  edge_weight = 0x72686f,
  recovery_clock = 0x54,
  edge_clock = 0x55,
  graph = 0x6572,
};

// Uniform on the open interval (0, 1) from the top 53 bits.
constexpr double to_unit_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double exp1_from_bits(std::uint64_t bits) noexcept { return -std::log(to_unit_open(bits)); }

// Sequential counter-based generator; satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Stream(std::uint64_t key) noexcept : key_(mix64(key)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return mix64(key_ + kGolden * ++counter_); }

  double uniform() noexcept { return to_unit_open((*this)()); }

  double exponential(double rate) noexcept {
    return rate > 0 ? exp1_from_bits((*this)()) / rate : std::numeric_limits<double>::infinity();
  }

  // Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    std::uint64_t x = (*this)();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<unsigned __int128>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sirenv
