#pragma once

// Monte Carlo batches and lambda sweeps over an n-grid.
//
// Replication k of grid point g draws its run randomness from
// (master_seed, "run", g, k). In annealed mode the environment is fresh per
// replication, keyed (master_seed, "env", g, k); in quenched mode a single
// environment keyed (master_seed, "env") is shared by every run. Results are
// therefore identical for any number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sirenv/analytics.hpp"
#include "sirenv/config.hpp"
#include "sirenv/distribution.hpp"
#include "sirenv/dynamics.hpp"
#include "sirenv/environment.hpp"
#include "sirenv/percolation.hpp"
#include "sirenv/statistics.hpp"

namespace sirenv {

enum class Measure : std::uint8_t { annealed, quenched };
enum class LambdaUnits : std::uint8_t { absolute, critical };

constexpr std::string_view to_string(Measure m) noexcept { return m == Measure::annealed ? "annealed" : "quenched"; }
constexpr std::string_view to_string(LambdaUnits u) noexcept {
  return u == LambdaUnits::absolute ? "absolute" : "critical";
}

struct ExperimentConfig {
  DistSpec xi_spec = DistSpec::constant(1.0, Role::recovery);
  DistSpec rho_spec = DistSpec::constant(1.0, Role::weight);
  std::vector<std::uint64_t> n_grid{100};
  std::vector<double> lambda_grid{1.0};
  LambdaUnits lambda_units = LambdaUnits::absolute;
  std::uint64_t replications = 1000;
  Engine engine = Engine::percolation;
  Measure measure = Measure::annealed;
  double epsilon = 0.05;
  std::uint64_t master_seed = 1;
  double confidence = 0.95;
  Method method = Method::direct;
  PercolationMode percolation_mode = PercolationMode::skip;
};

inline void validate(const ExperimentConfig& c) {
  if (c.xi_spec.role() != Role::recovery) throw error(errc::param_violation, "xi_spec must have the recovery role");
  if (c.rho_spec.role() != Role::weight) throw error(errc::param_violation, "rho_spec must have the weight role");
  validate_spec(c.xi_spec);
  validate_spec(c.rho_spec);
  if (c.n_grid.empty()) throw error(errc::param_violation, "n_grid must be non-empty");
  if (c.lambda_grid.empty()) throw error(errc::param_violation, "lambda_grid must be non-empty");
  for (auto n : c.n_grid)
    if (n < 1) throw error(errc::param_violation, "n_grid entries require n >= 1");
  for (auto l : c.lambda_grid)
    if (!(l >= 0.0) || !std::isfinite(l)) throw error(errc::param_violation, "lambda_grid entries require lambda ≥ 0");
  if (c.replications < 1) throw error(errc::param_violation, "replications requires replications >= 1");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw error(errc::param_violation, "epsilon requires 0 < epsilon < 1");
  if (!(c.confidence > 0.0 && c.confidence < 1.0))
    throw error(errc::param_violation, "confidence requires 0 < confidence < 1");
}

inline double config_lambda_c(const ExperimentConfig& c) { return critical_lambda(c.rho_spec, c.xi_spec); }

inline double resolve_lambda(const ExperimentConfig& c, double raw) {
  return c.lambda_units == LambdaUnits::critical ? raw * config_lambda_c(c) : raw;
}

struct BatchStats {
  std::uint64_t n = 0;
  double lambda = 0;
  double lambda_over_lambda_c = 0;
  std::uint64_t grid_index = 0;
  Tally tally;

  double mean_r_inf = 0;
  Interval mean_r_inf_ci;
  double mean_final_fraction = 0;
  Interval mean_final_fraction_ci;
  double exceed_probability = 0;
  Interval exceed_ci;
  double p_no_spread = 0;
  Interval p_no_spread_ci;
  double p_spread = 0;
  // Mean of r_inf / n over the runs with r_inf / n >= epsilon; NaN if none.
  double conditional_exceed_fraction = std::numeric_limits<double>::quiet_NaN();

  // References.
  double lambda_c = 0;
  double subcritical_bound = std::numeric_limits<double>::infinity();  // lambda_c / (lambda_c - lambda)
  double chebyshev_bound = std::numeric_limits<double>::infinity();    // bound / (epsilon n)
  double analytic_no_spread = 0;
  double limit_no_spread = 0;
};

struct NoSpreadEstimate {
  double estimate = 0;
  Interval ci;
  double finite_n_analytic = 0;
  double limit_analytic = 0;
  std::uint64_t trials = 0;
};

inline std::uint64_t replication_run_seed(const ExperimentConfig& c, std::uint64_t grid_index, std::uint64_t rep) {
  return derive_key(c.master_seed, stream_tag::run, grid_index, rep);
}

inline std::uint64_t replication_env_seed(const ExperimentConfig& c, std::uint64_t grid_index, std::uint64_t rep) {
  return c.measure == Measure::quenched ? derive_key(c.master_seed, stream_tag::env)
                                        : derive_key(c.master_seed, stream_tag::env, grid_index, rep);
}

inline bool exceeds(std::uint64_t r, std::uint64_t n, double epsilon) {
  return static_cast<double>(r) / static_cast<double>(n) >= epsilon;
}

// One replication: r_inf and whether the run was cut off by the event cap.
inline std::pair<std::uint64_t, bool> run_replication(const ExperimentConfig& c, std::uint64_t n, double lambda,
                                                      std::uint64_t grid_index, std::uint64_t rep) {
  const Environment env(n, replication_env_seed(c, grid_index, rep), c.xi_spec, c.rho_spec);
  const std::uint64_t run_seed = replication_run_seed(c, grid_index, rep);
  if (c.engine == Engine::percolation)
    return {percolation_final_size(env, lambda, run_seed, c.percolation_mode).r_infinity, false};
  SimParams p;
  p.lambda = lambda;
  p.run_seed = run_seed;
  p.method = c.method;
  const RunResult res = gillespie_run(env, p);
  return {res.r_infinity, res.truncated};
}

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

inline Tally collect_tally(const ExperimentConfig& c, std::uint64_t n, double lambda, std::uint64_t grid_index,
                           unsigned jobs) {
  jobs = std::max(1u, jobs);
  std::atomic<std::uint64_t> next{0};
  std::vector<Tally> partial(jobs);
  auto work = [&](unsigned w) {
    Tally& t = partial[w];
    for (std::uint64_t rep = next++; rep < c.replications; rep = next++) {
      try {
        const auto [r, truncated] = run_replication(c, n, lambda, grid_index, rep);
        if (truncated) {
          ++t.truncated;
          continue;
        }
        t.add(r, exceeds(r, n, c.epsilon));
      } catch (const std::exception&) {
        ++t.failures;
      }
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  Tally total;
  for (const auto& t : partial) total += t;
  return total;
}

inline BatchStats summarize(const ExperimentConfig& c, std::uint64_t n, double lambda, std::uint64_t grid_index,
                            const Tally& t) {
  BatchStats b;
  b.n = n;
  b.lambda = lambda;
  b.grid_index = grid_index;
  b.tally = t;
  b.lambda_c = config_lambda_c(c);
  b.lambda_over_lambda_c = lambda / b.lambda_c;
  const double nd = static_cast<double>(n);
  if (t.runs > 0) {
    b.mean_r_inf = t.mean();
    b.mean_r_inf_ci = t.mean_interval(c.confidence);
    b.mean_final_fraction = b.mean_r_inf / nd;
    b.mean_final_fraction_ci = {b.mean_r_inf_ci.lo / nd, b.mean_r_inf_ci.hi / nd};
    b.exceed_probability = static_cast<double>(t.exceed) / static_cast<double>(t.runs);
    b.exceed_ci = wilson_interval(t.exceed, t.runs, c.confidence);
    b.p_no_spread = static_cast<double>(t.no_spread) / static_cast<double>(t.runs);
    b.p_no_spread_ci = wilson_interval(t.no_spread, t.runs, c.confidence);
    b.p_spread = static_cast<double>(t.runs - t.no_spread) / static_cast<double>(t.runs);
    if (t.exceed > 0)
      b.conditional_exceed_fraction = static_cast<double>(t.exceed_sum_r) / (static_cast<double>(t.exceed) * nd);
  }
  b.subcritical_bound = subcritical_mean_bound(lambda, b.lambda_c);
  b.chebyshev_bound = b.subcritical_bound / (c.epsilon * nd);
  b.analytic_no_spread = no_spread_probability(c.rho_spec, c.xi_spec, lambda, n);
  b.limit_no_spread = no_spread_limit(c.rho_spec, c.xi_spec, lambda);
  return b;
}

// Runs config.replications replications at one grid point (lambda absolute).
inline BatchStats run_batch(const ExperimentConfig& c, std::uint64_t n, double lambda, std::uint64_t grid_index = 0,
                            unsigned jobs = 1) {
  validate(c);
  if (n < 1) throw error(errc::param_violation, "vertex count requires n >= 1");
  if (!(lambda >= 0.0)) throw error(errc::param_violation, "infection rate requires lambda ≥ 0");
  return summarize(c, n, lambda, grid_index, collect_tally(c, n, lambda, grid_index, jobs));
}

inline NoSpreadEstimate estimate_p_no_spread(const ExperimentConfig& c, std::uint64_t n, double lambda,
                                             std::uint64_t grid_index = 0, unsigned jobs = 1) {
  const BatchStats b = run_batch(c, n, lambda, grid_index, jobs);
  return {b.p_no_spread, b.p_no_spread_ci, b.analytic_no_spread, b.limit_no_spread, b.tally.runs};
}

struct SupercriticalWitness {
  double lambda = 0;
  double c = 0;     // the configured epsilon
  double b = 0;     // min over the n-grid of exceed_probability
  double b_lo = 0;  // min over the n-grid of the lower Wilson bound
};

struct SubcriticalCheck {
  double lambda = 0;
  std::vector<double> exceed_by_n;  // in n_grid order
  bool nonincreasing = true;
  bool strictly_decreasing = true;
};

struct SweepResult {
  ExperimentConfig config;
  double lambda_c = 0;
  std::vector<BatchStats> rows;  // lambda-major, n-minor; grid_index = row position
  std::vector<SupercriticalWitness> witnesses;
  std::vector<SubcriticalCheck> subcritical;
};

inline SweepResult sweep(const ExperimentConfig& c, unsigned jobs = 1) {
  validate(c);
  SweepResult out;
  out.config = c;
  out.lambda_c = config_lambda_c(c);
  std::uint64_t g = 0;
  for (double raw : c.lambda_grid) {
    const double lambda = resolve_lambda(c, raw);
    std::vector<const BatchStats*> by_n;
    for (std::uint64_t n : c.n_grid) out.rows.push_back(run_batch(c, n, lambda, g++, jobs));
    for (std::size_t k = out.rows.size() - c.n_grid.size(); k < out.rows.size(); ++k) by_n.push_back(&out.rows[k]);

    if (lambda > out.lambda_c) {
      SupercriticalWitness w{lambda, c.epsilon, 1.0, 1.0};
      for (const auto* b : by_n) {
        w.b = std::min(w.b, b->exceed_probability);
        w.b_lo = std::min(w.b_lo, b->exceed_ci.lo);
      }
      out.witnesses.push_back(w);
    } else if (lambda < out.lambda_c) {
      // Checked in increasing n regardless of grid order.
      std::vector<const BatchStats*> sorted = by_n;
      std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->n < b->n; });
      SubcriticalCheck chk;
      chk.lambda = lambda;
      for (const auto* b : by_n) chk.exceed_by_n.push_back(b->exceed_probability);
      for (std::size_t k = 1; k < sorted.size(); ++k) {
        if (sorted[k]->exceed_probability > sorted[k - 1]->exceed_probability) chk.nonincreasing = false;
        if (!(sorted[k]->exceed_probability < sorted[k - 1]->exceed_probability)) chk.strictly_decreasing = false;
      }
      out.subcritical.push_back(chk);
    }
  }
  return out;
}

}  // namespace sirenv
