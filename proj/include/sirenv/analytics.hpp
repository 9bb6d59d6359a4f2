#pragma once

// Closed-form and quadrature references used to check the engines.
//
// Expectations of ratios such as E[a rho / (a rho + xi)] are turned into
// one-dimensional integrals with x / (x + y) = int_0^inf x e^{-t (x + y)} dt,
// so that independence factors the integrand into Laplace transforms, which
// every supported family has in closed form.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "sirenv/distribution.hpp"
#include "sirenv/environment.hpp"
#include "sirenv/error.hpp"

namespace sirenv {

namespace detail {

template <typename F>
double integrate_half_line(F&& f, std::string_view what) {
  double err = 0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-13, &err);
  if (!std::isfinite(value) || err > 1e-10 * std::abs(value) + 1e-300)
    throw error(errc::quadrature_failure, std::string(what) + " did not reach relative accuracy 1e-10 (error estimate " +
                                              std::to_string(err) + ")");
  return value;
}

}  // namespace detail

// Probability that an infective i infects a given susceptible j before it
// recovers, averaged over the environment: E[(l/n) rho / ((l/n) rho + xi)].
inline double per_edge_open_probability(const DistSpec& rho, const DistSpec& xi, double lambda, std::uint64_t n) {
  if (n < 1) throw error(errc::param_violation, "vertex count requires n >= 1");
  if (!(lambda >= 0.0)) throw error(errc::param_violation, "infection rate requires lambda ≥ 0");
  const double a = lambda / static_cast<double>(n);
  if (a == 0.0) return 0.0;
  if (rho.is_discrete() && xi.is_discrete()) {
    return rho.expect_discrete([&](double r) {
      return xi.expect_discrete([&](double x) { return a * r / (a * r + x); });
    });
  }
  return detail::integrate_half_line(
      [&](double t) { return a * rho.x_laplace(t * a) * xi.laplace(t); }, "per-edge open probability");
}

// P(r_inf = 1) on C_n under the annealed measure:
// E[xi(0) / (xi(0) + (l/n) sum_{i=1}^{n-1} rho(0, i))].
inline double no_spread_probability(const DistSpec& rho, const DistSpec& xi, double lambda, std::uint64_t n) {
  if (n < 1) throw error(errc::param_violation, "vertex count requires n >= 1");
  if (!(lambda >= 0.0)) throw error(errc::param_violation, "infection rate requires lambda ≥ 0");
  const double a = lambda / static_cast<double>(n);
  const double others = static_cast<double>(n - 1);
  if (a == 0.0 || n == 1) return 1.0;
  if (rho.is_constant()) return xi.mean_ratio(a * others * rho.mean());
  return detail::integrate_half_line(
      [&](double t) {
        const double lr = rho.laplace(t * a);
        if (lr <= 0) return 0.0;
        return xi.x_laplace(t) * std::exp(others * std::log(lr));
      },
      "no-spread probability");
}

// n -> infinity limit of the above: E[xi / (xi + lambda E rho)].
inline double no_spread_limit(const DistSpec& rho, const DistSpec& xi, double lambda) {
  return xi.mean_ratio(lambda * rho.mean());
}

// The same quantity for one fixed environment (quenched).
inline double quenched_no_spread_probability(const Environment& env, double lambda) {
  const double a = lambda / static_cast<double>(env.n());
  double w = 0;
  for (vertex_t i = 1; i < env.n(); ++i) w += env.rho_unchecked(0, i);
  const double x = env.xi_unchecked(0);
  return x / (x + a * w);
}

// Bound on E r_inf below criticality: sum_k (lambda/lambda_c)^k.
inline double subcritical_mean_bound(double lambda, double lambda_c) {
  if (!(lambda < lambda_c)) return std::numeric_limits<double>::infinity();
  return lambda_c / (lambda_c - lambda);
}

}  // namespace sirenv
