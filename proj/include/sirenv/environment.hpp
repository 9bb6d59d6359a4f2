#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>

#include "sirenv/distribution.hpp"
#include "sirenv/error.hpp"
#include "sirenv/rng.hpp"

namespace sirenv {

using vertex_t = std::uint32_t;

// The random environment {xi(j)}, {rho(i,j)} on the complete graph C_n.
//
// Nothing is stored per vertex or per edge: each value is the spec's quantile
// of a uniform hashed from (seed, index), and rho is keyed by the unordered
// pair so rho_at(i, j) == rho_at(j, i) bit for bit. Environments with the same
// seed and specs but different n agree on their common vertices, so C_n sits
// inside C_m as a subgraph.
class Environment {
 public:
  Environment(std::uint64_t n, std::uint64_t seed, DistSpec xi_spec, DistSpec rho_spec)
      : n_(n), seed_(seed), xi_spec_(std::move(xi_spec)), rho_spec_(std::move(rho_spec)) {
    if (n_ < 1) throw error(errc::param_violation, "vertex count requires n >= 1");
    if (n_ > (std::uint64_t{1} << 32))
      throw error(errc::param_violation, "vertex count must fit 32-bit vertex ids");
    if (xi_spec_.role() != Role::recovery)
      throw error(errc::param_violation, "xi spec must carry the recovery role");
    if (rho_spec_.role() != Role::weight) throw error(errc::param_violation, "rho spec must carry the weight role");
    validate_spec(xi_spec_);
    validate_spec(rho_spec_);
    xi_law_ = xi_spec_.resolved();
    rho_law_ = rho_spec_.resolved();
    xi_const_ = std::holds_alternative<Constant>(xi_law_);
    rho_const_ = std::holds_alternative<Constant>(rho_law_);
  }

  std::uint64_t n() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const DistSpec& xi_spec() const noexcept { return xi_spec_; }
  const DistSpec& rho_spec() const noexcept { return rho_spec_; }

  double xi_at(std::uint64_t j) const {
    if (j >= n_) throw error(errc::index_out_of_range, "vertex " + std::to_string(j) + " outside C_" + std::to_string(n_));
    return xi_unchecked(static_cast<vertex_t>(j));
  }

  double rho_at(std::uint64_t i, std::uint64_t j) const {
    if (i >= n_ || j >= n_)
      throw error(errc::index_out_of_range,
                  "edge (" + std::to_string(i) + ", " + std::to_string(j) + ") outside C_" + std::to_string(n_));
    if (i == j) throw error(errc::self_loop, "rho(i, i) is undefined; i = " + std::to_string(i));
    return rho_unchecked(static_cast<vertex_t>(i), static_cast<vertex_t>(j));
  }

  // Hot-loop accessors; callers guarantee 0 <= i != j < n.
  double xi_unchecked(vertex_t j) const noexcept {
    if (xi_const_) return std::get<Constant>(xi_law_).value;
    return quantile(xi_law_, to_unit_open(derive_key(seed_, stream_tag::recovery_rate, j)));
  }

  double rho_unchecked(vertex_t i, vertex_t j) const noexcept {
    if (rho_const_) return std::get<Constant>(rho_law_).value;
    const auto lo = std::min(i, j);
    const auto hi = std::max(i, j);
    return quantile(rho_law_, to_unit_open(derive_key(seed_, stream_tag::edge_weight, lo, hi)));
  }

  bool rho_is_constant() const noexcept { return rho_const_; }

 private:
  static double quantile(const BaseFamily& law, double u) noexcept {
    switch (law.index()) {
      case 0:
        return std::get<0>(law).value;
      case 1: {
        const auto& d = std::get<1>(law);
        return d.lo + (d.hi - d.lo) * u;
      }
      default: {
        const auto& t = std::get<2>(law);
        return u < t.p1 ? t.v1 : t.v2;
      }
    }
  }

  std::uint64_t n_;
  std::uint64_t seed_;
  DistSpec xi_spec_;
  DistSpec rho_spec_;
  BaseFamily xi_law_;
  BaseFamily rho_law_;
  bool xi_const_ = false;
  bool rho_const_ = false;
};

}  // namespace sirenv
