#include <gtest/gtest.h>

#include <cmath>

#include "sirenv/dynamics.hpp"
#include "sirenv/statistics.hpp"
#include "support/oracles.hpp"

using namespace sirenv;

namespace {

Environment make_env(std::uint64_t n, std::uint64_t seed, const char* xi, const char* rho) {
  return Environment(n, seed, parse_spec(xi, Role::recovery), parse_spec(rho, Role::weight));
}

RunResult run(const Environment& env, double lambda, std::uint64_t seed, Method m = Method::direct) {
  SimParams p;
  p.lambda = lambda;
  p.run_seed = seed;
  p.method = m;
  return gillespie_run(env, p);
}

}  // namespace

TEST(Gillespie, ZeroInfectionRateRemovesOnlyTheSeed) {
  const auto env = make_env(50, 1, "two_point:1:0.5:2", "uniform:0:1");
  for (std::uint64_t s = 0; s < 20; ++s) {
    const RunResult r = run(env, 0.0, s);
    EXPECT_EQ(r.r_infinity, 1u);
    EXPECT_EQ(r.events_executed, 1u);
    EXPECT_FALSE(r.truncated);
  }
}

TEST(Gillespie, SingleVertex) {
  const auto env = make_env(1, 1, "constant:1", "constant:1");
  const RunResult r = run(env, 5.0, 3);
  EXPECT_EQ(r.r_infinity, 1u);
  EXPECT_EQ(r.events_executed, 1u);
}

TEST(Gillespie, TwoVertexRaceIsFair) {
  // Infection rate (2/2) * 1 against recovery rate 1.
  const auto env = make_env(2, 1, "constant:1", "constant:1");
  std::uint64_t both = 0;
  const std::uint64_t runs = 100000;
  for (std::uint64_t s = 0; s < runs; ++s) both += run(env, 2.0, s).r_infinity == 2;
  EXPECT_TRUE(wilson_interval(both, runs, 0.99).contains(0.5)) << both;
}

TEST(Gillespie, InvalidLambda) {
  const auto env = make_env(5, 1, "constant:1", "constant:1");
  try {
    run(env, -1.0, 0);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::param_violation);
    EXPECT_NE(std::string(e.what()).find("lambda ≥ 0"), std::string::npos);
  }
  EXPECT_THROW(run(env, std::nan(""), 0), error);
}

TEST(NextEvent, ThreeVertexFrequencies) {
  const auto env = make_env(3, 1, "constant:1", "constant:1");
  const EpidemicState state(env, 3.0);
  EXPECT_DOUBLE_EQ(state.total_recovery_rate(), 1.0);
  EXPECT_DOUBLE_EQ(state.total_infection_rate(), 2.0);
  Stream rng(17);
  std::vector<double> counts(3, 0.0);
  double dt_sum = 0;
  const int draws = 30000;
  for (int k = 0; k < draws; ++k) {
    const TimedEvent e = state.next_event(rng);
    dt_sum += e.dt;
    if (e.event.kind == EventKind::recovery) {
      EXPECT_EQ(e.event.vertex, 0u);
      counts[0] += 1;
    } else {
      ASSERT_EQ(e.event.kind, EventKind::infection);
      counts[e.event.vertex] += 1;
    }
  }
  EXPECT_GT(oracle::chi2_gof_pvalue(counts, {draws / 3.0, draws / 3.0, draws / 3.0}), 0.01);
  // Holding time is Exp(3): mean 1/3, sd 1/3.
  EXPECT_NEAR(dt_sum / draws, 1.0 / 3.0, 4.0 / 3.0 / std::sqrt(double(draws)));
}

TEST(NextEvent, DeadStateThrows) {
  const auto env = make_env(3, 1, "constant:1", "constant:1");
  EpidemicState state(env, 1.0);
  state.recover(0);
  Stream rng(1);
  try {
    state.next_event(rng);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::dead_state);
  }
}

TEST(EpidemicState, CachedRatesMatchRecomputation) {
  for (std::uint64_t n : {2u, 17u, 200u}) {
    const auto env = make_env(n, n, "shifted:uniform:0:1:+1", "uniform:0:1");
    EpidemicState state(env, 4.0);
    Stream rng(n);
    while (state.infective_count() > 0) {
      const double rec = state.recompute_total_recovery_rate();
      const double inf = state.recompute_total_infection_rate();
      ASSERT_NEAR(state.total_recovery_rate(), rec, 1e-9 * std::max(1.0, rec));
      ASSERT_NEAR(state.total_infection_rate(), inf, 1e-9 * std::max(1.0, inf));
      for (vertex_t s : state.susceptibles()) {
        const double p = state.recompute_pressure(s);
        ASSERT_NEAR(state.pressure(s), p, 1e-9 * std::max(1.0, p));
      }
      state.apply(state.next_event(rng).event);
    }
  }
}

TEST(Gillespie, TrajectoryIsMonotoneAndConserved) {
  const auto env = make_env(300, 5, "two_point:1:0.5:2", "uniform:0:1");
  for (Method m : {Method::direct, Method::thinning}) {
    SimParams p;
    p.lambda = 6.0;
    p.run_seed = 8;
    p.method = m;
    p.record_trajectory = true;
    const RunResult r = gillespie_run(env, p);
    ASSERT_EQ(r.trajectory.size(), r.events_executed);
    std::uint64_t prev_s = 299, prev_r = 0;
    double prev_t = 0;
    for (const auto& row : r.trajectory) {
      EXPECT_EQ(row.s_count + row.i_count + row.r_count, 300u);
      EXPECT_LE(row.s_count, prev_s);
      EXPECT_GE(row.r_count, prev_r);
      EXPECT_GE(row.time, prev_t);
      prev_s = row.s_count;
      prev_r = row.r_count;
      prev_t = row.time;
    }
    EXPECT_EQ(r.trajectory.back().i_count, 0u);
    EXPECT_EQ(r.r_infinity, r.trajectory.back().r_count);
    EXPECT_DOUBLE_EQ(r.extinction_time, r.trajectory.back().time);
  }
}

TEST(Gillespie, SeedDeterminism) {
  const auto env = make_env(500, 9, "shifted:uniform:0:1:+1", "uniform:0:1");
  SimParams p;
  p.lambda = 5.0;
  p.run_seed = 42;
  p.record_trajectory = true;
  const RunResult a = gillespie_run(env, p);
  const RunResult b = gillespie_run(env, p);
  EXPECT_EQ(a.trajectory, b.trajectory);
  EXPECT_EQ(a.r_infinity, b.r_infinity);
  p.run_seed = 43;
  EXPECT_NE(gillespie_run(env, p).trajectory, a.trajectory);
}

TEST(Gillespie, EventCapTruncates) {
  const auto env = make_env(1000, 1, "constant:1", "constant:1");
  SimParams p;
  p.lambda = 5.0;
  p.max_events = 10;
  std::uint64_t s = 0;
  RunResult r;
  do r = (p.run_seed = s++, gillespie_run(env, p));
  while (!r.truncated && s < 100);
  ASSERT_TRUE(r.truncated);
  EXPECT_EQ(r.events_executed, 10u);
}

TEST(Gillespie, MatchesExactFinalSizeLaw) {
  const std::uint64_t n = 5;
  const auto env = make_env(n, 21, "two_point:1:0.5:3", "uniform:0:1");
  std::vector<double> xi(n);
  std::vector<std::vector<double>> rho(n, std::vector<double>(n, 0.0));
  for (vertex_t i = 0; i < n; ++i) {
    xi[i] = env.xi_at(i);
    for (vertex_t j = 0; j < n; ++j)
      if (i != j) rho[i][j] = env.rho_at(i, j);
  }
  const double lambda = 8.0;
  const auto law = oracle::final_size_law(xi, rho, lambda);
  for (Method m : {Method::direct, Method::thinning}) {
    const std::uint64_t runs = 100000;
    std::vector<double> observed(n + 1, 0.0), expected(n + 1, 0.0);
    for (std::uint64_t s = 0; s < runs; ++s) observed[run(env, lambda, s, m).r_infinity] += 1;
    for (std::size_t k = 0; k <= n; ++k) expected[k] = law[k] * runs;
    EXPECT_GT(oracle::chi2_gof_pvalue(observed, expected), 0.01) << to_string(m);
  }
}

TEST(Gillespie, ThinningAgreesWithDirect) {
  const auto env = make_env(30, 4, "shifted:uniform:0:1:+1", "uniform:0:1");
  std::vector<std::uint64_t> a, b;
  for (std::uint64_t s = 0; s < 20000; ++s) {
    a.push_back(run(env, 3.0, s, Method::direct).r_infinity);
    b.push_back(run(env, 3.0, s + 1000000, Method::thinning).r_infinity);
  }
  EXPECT_GT(oracle::chi2_two_sample_pvalue(a, b), 0.01);
}
