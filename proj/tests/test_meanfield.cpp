#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

#include "sirenv/distribution.hpp"
#include "sirenv/meanfield.hpp"
#include "support/oracles.hpp"

using namespace sirenv;
using meanfield::State;

namespace {

// Adaptive Dormand-Prince at tight tolerance, independent of the RK4 solver.
std::array<double, 3> reference_state(double lambda, std::array<double, 3> x, double t_end) {
  namespace ode = boost::numeric::odeint;
  auto rhs = [lambda](const std::array<double, 3>& y, std::array<double, 3>& dy, double) {
    dy[0] = -lambda * y[1] * y[0];
    dy[1] = y[1] * (lambda * y[0] - 1.0);
    dy[2] = y[1];
  };
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<std::array<double, 3>>>(1e-13, 1e-13), rhs, x,
                          0.0, t_end, 1e-3);
  return x;
}

}  // namespace

TEST(MeanField, NoInfectivesStaysPut) {
  const auto path = meanfield::ode_solve(3.0, State{0, 0.7, 0.0, 0.3});
  ASSERT_EQ(path.size(), 1u);
  EXPECT_EQ(path.back().s, 0.7);
  EXPECT_EQ(path.back().r, 0.3);
}

TEST(MeanField, SubcriticalInfectivesDecrease) {
  const auto path = meanfield::ode_solve(0.8, State{0, 0.99, 0.01, 0.0}, 20.0, 1e-3, 1);
  for (std::size_t k = 1; k < path.size(); ++k) EXPECT_LT(path[k].i, path[k - 1].i);
}

TEST(MeanField, MatchesAdaptiveReference) {
  const auto path = meanfield::ode_solve(2.0, State{0, 0.999, 0.001, 0.0}, 50.0, 1e-3, 500);
  for (const State& st : path) {
    const auto ref = reference_state(2.0, {0.999, 0.001, 0.0}, st.t);
    EXPECT_NEAR(st.s, ref[0], 1e-3) << st.t;
    EXPECT_NEAR(st.i, ref[1], 1e-3) << st.t;
    EXPECT_NEAR(st.r, ref[2], 1e-3) << st.t;
  }
}

TEST(MeanField, ConservationAndFirstIntegral) {
  for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
    const auto path = meanfield::ode_solve(lambda, State{0, 0.99, 0.01, 0.0});
    for (const State& st : path) {
      EXPECT_LE(std::abs(st.s + st.i + st.r - 1.0), 1e-9);
      // ds/dr = -lambda s, so s = s0 exp(-lambda r) along the solution.
      EXPECT_NEAR(st.s, 0.99 * std::exp(-lambda * st.r), 1e-9);
    }
  }
}

TEST(MeanField, StepHalvingConverges) {
  const auto a = meanfield::ode_solve(2.0, State{0, 0.99, 0.01, 0.0}, 10.0, 1e-3);
  const auto b = meanfield::ode_solve(2.0, State{0, 0.99, 0.01, 0.0}, 10.0, 5e-4);
  EXPECT_DOUBLE_EQ(a.back().t, 10.0);
  EXPECT_DOUBLE_EQ(b.back().t, 10.0);
  EXPECT_LE(std::abs(a.back().r - b.back().r), 1e-8);
  EXPECT_LE(std::abs(a.back().i - b.back().i), 1e-8);
}

TEST(MeanField, TerminalStateApproachesFixedPoint) {
  const auto path = meanfield::ode_solve(2.0, State{0, 0.999, 0.001, 0.0});
  const auto fp = meanfield::final_size_fixed_point(2.0, 0.999, 0.001);
  EXPECT_TRUE(fp.bracketed);
  EXPECT_NEAR(path.back().r, fp.value, 1e-4);
}

TEST(FixedPoint, ReferenceValues) {
  EXPECT_DOUBLE_EQ(meanfield::final_size_fixed_point(0.0, 1.0, 0.0).value, 0.0);
  EXPECT_NEAR(meanfield::final_size_fixed_point(2.0, 1.0, 0.0).value, oracle::giant_fraction_by_iteration(2.0), 1e-11);
  EXPECT_NEAR(meanfield::final_size_fixed_point(2.0, 1.0, 0.0).value, 0.79681, 1e-5);
  EXPECT_NEAR(meanfield::final_size_fixed_point(1.0, 1.0, 0.0).value, 0.0, 1e-9);
  EXPECT_NEAR(meanfield::final_size_fixed_point(0.5, 1.0, 0.0).value, 0.0, 1e-9);
  for (double lambda : {1.2, 1.5, 3.0, 8.0}) {
    const double r = meanfield::final_size_fixed_point(lambda, 1.0, 0.0).value;
    EXPECT_NEAR(r, 1.0 - std::exp(-lambda * r), 1e-11);
    EXPECT_GT(r, 0.0);
  }
}

TEST(MeanField, RefusesEnvironmentLaws) {
  EXPECT_NO_THROW(meanfield::require_classic(parse_spec("constant:1", Role::recovery),
                                             parse_spec("constant:1", Role::weight)));
  EXPECT_THROW(meanfield::require_classic(parse_spec("two_point:1:0.5:2", Role::recovery),
                                          parse_spec("constant:1", Role::weight)),
               error);
  EXPECT_THROW(meanfield::require_classic(parse_spec("constant:1", Role::recovery),
                                          parse_spec("uniform:0:1", Role::weight)),
               error);
}

TEST(MeanField, OversizedStepIsReported) {
  try {
    meanfield::ode_solve(50.0, State{0, 0.5, 0.5, 0.0}, 10.0, 1.0);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::step_too_large);
  }
}

TEST(MeanField, InvalidInputs) {
  EXPECT_THROW(meanfield::ode_solve(-1.0, State{0, 1.0, 0.0, 0.0}), error);
  EXPECT_THROW(meanfield::ode_solve(1.0, State{0, 0.6, 0.6, 0.0}), error);
  EXPECT_THROW(meanfield::ode_solve(1.0, State{0, 1.0, 0.0, 0.0}, 1.0, 0.0), error);
}
