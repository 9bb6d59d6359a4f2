#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sirenv/analytics.hpp"
#include "sirenv/dynamics.hpp"
#include "sirenv/erdos_renyi.hpp"
#include "sirenv/percolation.hpp"
#include "sirenv/statistics.hpp"
#include "support/oracles.hpp"

using namespace sirenv;

namespace {

DistSpec xi(const char* t) { return parse_spec(t, Role::recovery); }
DistSpec rho(const char* t) { return parse_spec(t, Role::weight); }

Environment make_env(std::uint64_t n, std::uint64_t seed, const char* x, const char* r) {
  return Environment(n, seed, xi(x), rho(r));
}

}  // namespace

TEST(Percolation, ZeroRateReachesOnlyTheSeed) {
  const auto env = make_env(100, 1, "constant:1", "uniform:0:1");
  for (auto mode : {PercolationMode::clock, PercolationMode::skip}) {
    const ReachResult r = percolation_final_size(env, 0.0, 5, mode);
    EXPECT_EQ(r.r_infinity, 1u);
    EXPECT_EQ(r.reached, std::vector<vertex_t>{0});
  }
}

TEST(Percolation, TwoVertexRaceIsFair) {
  const auto env = make_env(2, 1, "constant:1", "constant:1");
  for (auto mode : {PercolationMode::clock, PercolationMode::skip}) {
    std::uint64_t both = 0;
    const std::uint64_t runs = 100000;
    for (std::uint64_t s = 0; s < runs; ++s) both += percolation_final_size(env, 2.0, s, mode).r_infinity == 2;
    EXPECT_TRUE(wilson_interval(both, runs, 0.99).contains(0.5)) << both;
  }
}

TEST(Percolation, ReachedSetIsDistinctAndConsistent) {
  const auto env = make_env(2000, 3, "two_point:1:0.5:2", "uniform:0:1");
  for (auto mode : {PercolationMode::clock, PercolationMode::skip}) {
    const ReachResult r = percolation_final_size(env, 4.0, 11, mode);
    std::set<vertex_t> distinct(r.reached.begin(), r.reached.end());
    EXPECT_EQ(distinct.size(), r.reached.size());
    EXPECT_EQ(r.r_infinity, r.reached.size());
    std::uint64_t layers = 0;
    for (auto f : r.frontier_history) layers += f;
    EXPECT_EQ(layers, r.r_infinity);
    EXPECT_EQ(r.frontier_history.front(), 1u);
  }
}

TEST(Percolation, LazySamplingBudget) {
  const auto env = make_env(3000, 2, "constant:1", "uniform:0:1");
  for (double lambda : {0.5, 1.5, 4.0}) {
    const ReachResult r = percolation_final_size(env, lambda, 7, PercolationMode::clock);
    EXPECT_LE(r.edge_clocks_sampled, r.r_infinity * env.n());
    EXPECT_EQ(r.recovery_clocks_sampled, r.r_infinity);
  }
}

TEST(Percolation, ClockModeIsMonotoneInLambda) {
  const auto env = make_env(400, 6, "shifted:uniform:0:1:+1", "uniform:0:1");
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::set<vertex_t> prev;
    for (double lambda : {0.5, 1.0, 2.0, 3.0, 6.0}) {
      const ReachResult r = percolation_final_size(env, lambda, seed, PercolationMode::clock);
      std::set<vertex_t> cur(r.reached.begin(), r.reached.end());
      EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())) << seed << " " << lambda;
      prev = std::move(cur);
    }
  }
}

TEST(Percolation, RunResultShape) {
  const auto env = make_env(100, 1, "constant:1", "constant:1");
  const RunResult r = percolation_run(env, 2.0, 3);
  EXPECT_EQ(r.engine, Engine::percolation);
  EXPECT_TRUE(std::isnan(r.extinction_time));
  EXPECT_EQ(r.n, 100u);
  EXPECT_FALSE(r.truncated);
}

TEST(Percolation, AgreesWithGillespieInLaw) {
  const auto env = make_env(30, 8, "two_point:1:0.5:2", "uniform:0:1");
  const double lambda = 3.0;
  std::vector<std::uint64_t> dyn, clock, skip;
  for (std::uint64_t s = 0; s < 20000; ++s) {
    SimParams p;
    p.lambda = lambda;
    p.run_seed = s;
    dyn.push_back(gillespie_run(env, p).r_infinity);
    clock.push_back(percolation_final_size(env, lambda, s + 5000000, PercolationMode::clock).r_infinity);
    skip.push_back(percolation_final_size(env, lambda, s + 9000000, PercolationMode::skip).r_infinity);
  }
  EXPECT_GT(oracle::chi2_two_sample_pvalue(dyn, clock), 0.01);
  EXPECT_GT(oracle::chi2_two_sample_pvalue(dyn, skip), 0.01);
}

TEST(Percolation, SkipAgreesWithClockAtModerateSize) {
  const auto env = make_env(500, 12, "shifted:uniform:0:1:+1", "uniform:0:1");
  std::vector<std::uint64_t> clock, skip;
  for (std::uint64_t s = 0; s < 5000; ++s) {
    clock.push_back(percolation_final_size(env, 3.0, s, PercolationMode::clock).r_infinity);
    skip.push_back(percolation_final_size(env, 3.0, s + 777777, PercolationMode::skip).r_infinity);
  }
  EXPECT_GT(oracle::chi2_two_sample_pvalue(clock, skip), 0.01);
}

TEST(EdgeProbability, ConstantRatesAreExact) {
  EXPECT_DOUBLE_EQ(per_edge_open_probability(rho("constant:1"), xi("constant:1"), 2.0, 4), 0.5 / 1.5);
  EXPECT_EQ(per_edge_open_probability(rho("constant:1"), xi("constant:1"), 0.0, 4), 0.0);
}

TEST(EdgeProbability, BoundedByFirstOrderTerm) {
  for (const char* x : {"constant:1", "two_point:1:0.5:2", "shifted:uniform:0:1:+1", "uniform:1:5"})
    for (const char* r : {"constant:1", "uniform:0:1", "two_point:0:0.5:1", "uniform:0.3:0.6"})
      for (double a : {1e-4, 0.01, 0.5, 3.0}) {
        const double p = per_edge_open_probability(rho(r), xi(x), a, 1);
        EXPECT_LE(p, a / critical_lambda(rho(r), xi(x)) * (1 + 1e-12)) << x << " " << r << " " << a;
        EXPECT_GE(p, 0.0);
      }
}

TEST(EdgeProbability, MatchesMonteCarlo) {
  const DistSpec x = xi("shifted:uniform:0:1:+1");
  const DistSpec r = rho("uniform:0:1");
  const double a = 0.5;  // lambda = 2, n = 4
  const double exact = per_edge_open_probability(r, x, 2.0, 4);
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::uint64_t samples = 10000000;
  std::uint64_t open = 0;
  for (std::uint64_t k = 0; k < samples; ++k) {
    const double rate_rec = 1.0 + u(gen);
    const double rate_inf = a * u(gen);
    const double t = std::exponential_distribution<double>(rate_rec)(gen);
    if (rate_inf > 0) open += std::exponential_distribution<double>(rate_inf)(gen) <= t;
  }
  const double est = double(open) / samples;
  EXPECT_NEAR(est, exact, 4.0 * std::sqrt(exact * (1 - exact) / samples));
}

TEST(NoSpread, ConstantRatesClosedForm) {
  for (double lambda : {0.5, 1.0, 3.0})
    for (std::uint64_t n : {1u, 2u, 10u, 1000u})
      EXPECT_NEAR(no_spread_probability(rho("constant:1"), xi("constant:1"), lambda, n),
                  1.0 / (1.0 + lambda * double(n - 1) / double(n)), 1e-14);
}

TEST(NoSpread, QuadratureMatchesDirectSummationForDiscreteLaws) {
  // rho two-point: the number of unit weights among n - 1 neighbours is binomial.
  const DistSpec r = rho("two_point:0:0.6:1");
  const DistSpec x = xi("two_point:1:0.3:2.5");
  const double lambda = 2.0;
  const std::uint64_t n = 40;
  double exact = 0;
  for (std::uint64_t k = 0; k < n; ++k) {
    const double pk = std::exp(std::lgamma(double(n)) - std::lgamma(double(k + 1)) - std::lgamma(double(n - k)) +
                               double(k) * std::log(0.4) + double(n - 1 - k) * std::log(0.6));
    const double y = lambda / double(n) * double(k);
    exact += pk * (0.3 * 1.0 / (1.0 + y) + 0.7 * 2.5 / (2.5 + y));
  }
  EXPECT_NEAR(no_spread_probability(r, x, lambda, n), exact, 1e-10);
}

TEST(ErdosRenyi, Extremes) {
  EXPECT_EQ(er_giant_component(500, 500.0, 1), 500u);
  EXPECT_EQ(er_giant_component(500, 0.0, 1), 1u);
  EXPECT_EQ(er_giant_component(1, 2.0, 1), 1u);
}

TEST(ErdosRenyi, GiantFractionMatchesFixedPoint) {
  const double z = oracle::giant_fraction_by_iteration(2.0);
  EXPECT_NEAR(z, 0.7968, 1e-4);
  const double frac = double(er_giant_component(100000, 2.0, 7)) / 100000.0;
  EXPECT_NEAR(frac, z, 0.01);
}

TEST(DisjointSet, Unions) {
  DisjointSet d(6);
  EXPECT_TRUE(d.unite(0, 1));
  EXPECT_TRUE(d.unite(2, 3));
  EXPECT_FALSE(d.unite(1, 0));
  EXPECT_TRUE(d.unite(1, 3));
  EXPECT_EQ(d.component_size(2), 4u);
  EXPECT_EQ(d.largest(), 4u);
}
