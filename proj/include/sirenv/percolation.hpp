#pragma once

// Final size through the static clock coupling. Give every vertex a recovery
// clock T(i) ~ Exp(xi(i)) and every ordered pair an edge clock
// U(i, j) ~ Exp((lambda/n) rho(i, j)). Vertex v is ever infected iff a path
// 0 = l_0, ..., l_k = v exists with U(l_m, l_{m+1}) <= T(l_m) for every step,
// so r_inf is the size of the set reachable from 0 over open arcs.
//
// All arcs out of i share T(i): they are dependent, and treating them as
// independent Bernoulli arcs would give the wrong law.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sirenv/dynamics.hpp"
#include "sirenv/environment.hpp"
#include "sirenv/error.hpp"
#include "sirenv/rng.hpp"

namespace sirenv {

// clock: every clock is a keyed draw, U sampled for each unvisited j when i is
//        explored. Cost O(n * r_inf). Coupled across lambda: with the run seed
//        fixed, the reached set only grows as lambda increases.
// skip:  given T(i) the arcs out of i are independent with probability
//        1 - exp(-(lambda/n) rho(i, j) T(i)) <= 1 - exp(-(lambda/n) T(i)); the
//        candidates under that envelope are found by geometric skipping and
//        then thinned by the exact ratio. Same law, cost O(r_inf + candidates).
enum class PercolationMode : std::uint8_t { clock, skip };

constexpr std::string_view to_string(PercolationMode m) noexcept {
  return m == PercolationMode::clock ? "clock" : "skip";
}

// Keyed coupling clocks for one run. Re-querying a clock returns the same
// value; the counters record how many queries were made.
class PercolationSample {
 public:
  PercolationSample(const Environment& env, double lambda, std::uint64_t run_seed)
      : env_(&env), scale_(lambda / static_cast<double>(env.n())), run_seed_(run_seed) {}

  double recovery_clock(vertex_t i) const {
    ++recovery_queries_;
    return exp1_from_bits(derive_key(run_seed_, stream_tag::recovery_clock, i)) / env_->xi_unchecked(i);
  }

  // U(i, j) and U(j, i) are different draws with the same rate.
  double edge_clock(vertex_t i, vertex_t j) const {
    ++edge_queries_;
    const double rate = scale_ * env_->rho_unchecked(i, j);
    if (!(rate > 0)) return std::numeric_limits<double>::infinity();
    return exp1_from_bits(derive_key(run_seed_, stream_tag::edge_clock, i, j)) / rate;
  }

  std::uint64_t recovery_queries() const noexcept { return recovery_queries_; }
  std::uint64_t edge_queries() const noexcept { return edge_queries_; }

 private:
  const Environment* env_;
  double scale_;
  std::uint64_t run_seed_;
  mutable std::uint64_t recovery_queries_ = 0;
  mutable std::uint64_t edge_queries_ = 0;
};

struct ReachResult {
  std::vector<vertex_t> reached;  // BFS order, reached[0] == 0
  std::uint64_t r_infinity = 0;
  std::vector<std::uint64_t> frontier_history;  // BFS layer sizes
  std::uint64_t edge_clocks_sampled = 0;        // arcs examined (clock) or envelope candidates (skip)
  std::uint64_t recovery_clocks_sampled = 0;
};

namespace detail {

struct Unvisited {
  explicit Unvisited(std::uint64_t n) : list(n > 0 ? n - 1 : 0), pos(n, 0) {
    for (vertex_t v = 1; v < n; ++v) {
      list[v - 1] = v;
      pos[v] = v - 1;
    }
  }
  void erase(vertex_t v) {
    const vertex_t at = pos[v];
    const vertex_t last = list.back();
    list[at] = last;
    pos[last] = at;
    list.pop_back();
  }
  std::vector<vertex_t> list;
  std::vector<vertex_t> pos;
};

}  // namespace detail

inline ReachResult percolation_final_size(const Environment& env, double lambda, std::uint64_t run_seed,
                                          PercolationMode mode = PercolationMode::skip) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw error(errc::param_violation, "infection rate requires lambda ≥ 0");
  const double scale = lambda / static_cast<double>(env.n());
  ReachResult out;
  out.reached.push_back(0);
  detail::Unvisited unvisited(env.n());
  PercolationSample clocks(env, lambda, run_seed);
  Stream rng(derive_key(run_seed, stream_tag::run, stream_tag::edge_clock));
  std::vector<vertex_t> opened;

  std::size_t layer_begin = 0;
  while (layer_begin < out.reached.size()) {
    const std::size_t layer_end = out.reached.size();
    out.frontier_history.push_back(layer_end - layer_begin);
    for (std::size_t k = layer_begin; k < layer_end && !unvisited.list.empty(); ++k) {
      const vertex_t i = out.reached[k];
      opened.clear();
      if (mode == PercolationMode::clock) {
        const double t_i = clocks.recovery_clock(i);
        for (vertex_t j : unvisited.list)
          if (clocks.edge_clock(i, j) <= t_i) opened.push_back(j);
      } else {
        ++out.recovery_clocks_sampled;
        const double t_i = rng.exponential(env.xi_unchecked(i));
        const double envelope = -std::expm1(-scale * t_i);
        if (envelope > 0) {
          const double log_miss = std::log1p(-envelope);
          const std::size_t m = unvisited.list.size();
          std::size_t idx = 0;
          while (true) {
            if (envelope < 1.0) {
              const double skip = std::floor(std::log(rng.uniform()) / log_miss);
              if (skip >= static_cast<double>(m - idx)) break;
              idx += static_cast<std::size_t>(skip);
            }
            if (idx >= m) break;
            const vertex_t j = unvisited.list[idx];
            ++out.edge_clocks_sampled;
            const double p = -std::expm1(-scale * env.rho_unchecked(i, j) * t_i);
            if (rng.uniform() * envelope < p) opened.push_back(j);
            ++idx;
          }
        }
      }
      for (vertex_t j : opened) {
        unvisited.erase(j);
        out.reached.push_back(j);
      }
    }
    layer_begin = layer_end;
  }
  if (mode == PercolationMode::clock) {
    out.edge_clocks_sampled = clocks.edge_queries();
    out.recovery_clocks_sampled = clocks.recovery_queries();
  }
  out.r_infinity = out.reached.size();
  return out;
}

inline RunResult percolation_run(const Environment& env, double lambda, std::uint64_t run_seed,
                                 PercolationMode mode = PercolationMode::skip) {
  const ReachResult reach = percolation_final_size(env, lambda, run_seed, mode);
  RunResult out;
  out.n = env.n();
  out.lambda = lambda;
  out.r_infinity = reach.r_infinity;
  out.engine = Engine::percolation;
  out.method = std::string(to_string(mode));
  out.provenance = {env.seed(), run_seed};
  return out;
}

}  // namespace sirenv
