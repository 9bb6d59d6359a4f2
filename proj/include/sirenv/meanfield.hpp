#pragma once

// Deterministic limit of (|S|/n, |I|/n, |R|/n) for the classic case
// xi = rho = 1:
//
//   s' = -lambda i s,   i' = i (lambda s - 1),   r' = i.
//
// No limit is offered for random environments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sirenv/distribution.hpp"
#include "sirenv/error.hpp"

namespace sirenv::meanfield {

struct State {
  double t = 0;
  double s = 1;
  double i = 0;
  double r = 0;
};

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDefaultHorizon = 50.0;
inline constexpr double kExtinctLevel = 1e-12;

inline void require_classic(const DistSpec& xi, const DistSpec& rho) {
  const auto is_one = [](const DistSpec& d) { return d.is_constant() && d.mean() == 1.0; };
  if (!is_one(xi) || !is_one(rho))
    throw error(errc::param_violation,
                "mean-field limit requires xi = constant:1 and rho = constant:1 (got " + xi.to_string() + ", " +
                    rho.to_string() + ")");
}

inline void validate_state(const State& st) {
  for (double v : {st.s, st.i, st.r})
    if (!(v >= 0.0 && v <= 1.0)) throw error(errc::param_violation, "fractions must lie in [0,1]");
  if (std::abs(st.s + st.i + st.r - 1.0) > 1e-9)
    throw error(errc::param_violation, "fractions must satisfy s + i + r = 1");
}

// Classical fixed-step RK4. Samples every `stride` steps plus the final state;
// stops early once i drops below 1e-12.
inline std::vector<State> ode_solve(double lambda, const State& init, double horizon = kDefaultHorizon,
                                    double step = kDefaultStep, std::uint64_t stride = 1) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw error(errc::param_violation, "infection rate requires lambda ≥ 0");
  if (!(step > 0.0)) throw error(errc::param_violation, "step requires step > 0");
  if (!(horizon >= 0.0)) throw error(errc::param_violation, "horizon requires horizon >= 0");
  if (stride == 0) stride = 1;
  validate_state(init);

  auto rhs = [lambda](double s, double i, double& ds, double& di, double& dr) {
    ds = -lambda * i * s;
    di = i * (lambda * s - 1.0);
    dr = i;
  };

  std::vector<State> out{init};
  State cur = init;
  const auto steps = static_cast<std::uint64_t>(std::ceil(horizon / step - 1e-9));
  for (std::uint64_t k = 1; k <= steps && cur.i >= kExtinctLevel; ++k) {
    const double h = std::min(step, horizon - cur.t);
    double s1, i1, r1, s2, i2, r2, s3, i3, r3, s4, i4, r4;
    rhs(cur.s, cur.i, s1, i1, r1);
    rhs(cur.s + 0.5 * h * s1, cur.i + 0.5 * h * i1, s2, i2, r2);
    rhs(cur.s + 0.5 * h * s2, cur.i + 0.5 * h * i2, s3, i3, r3);
    rhs(cur.s + h * s3, cur.i + h * i3, s4, i4, r4);
    cur.s += h / 6.0 * (s1 + 2 * s2 + 2 * s3 + s4);
    cur.i += h / 6.0 * (i1 + 2 * i2 + 2 * i3 + i4);
    cur.r += h / 6.0 * (r1 + 2 * r2 + 2 * r3 + r4);
    cur.t = std::min(static_cast<double>(k) * step, horizon);

    const double drift = std::abs(cur.s + cur.i + cur.r - 1.0);
    if (drift > 1e-6 || cur.s < -1e-9 || cur.i < -1e-9 || cur.r > 1.0 + 1e-9)
      throw error(errc::step_too_large, "integration left the simplex at t = " + std::to_string(cur.t) +
                                            "; reduce the step");
    if (k % stride == 0 || k == steps || cur.i < kExtinctLevel) out.push_back(cur);
  }
  return out;
}

struct FixedPoint {
  double value = 0;
  bool bracketed = true;  // false: no sign change, value is the trivial root
};

// Largest root in [0,1] of r = 1 - s0 exp(-lambda (r - r0)), r0 = 1 - s0 - i0,
// the final removed fraction of the system above. Bisection to 1e-12.
inline FixedPoint final_size_fixed_point(double lambda, double s0, double i0) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw error(errc::param_violation, "infection rate requires lambda ≥ 0");
  if (!(s0 >= 0.0 && i0 >= 0.0 && s0 + i0 <= 1.0 + 1e-12))
    throw error(errc::param_violation, "initial fractions require s0, i0 >= 0 and s0 + i0 <= 1");
  const double r0 = std::max(0.0, 1.0 - s0 - i0);
  auto f = [&](double r) { return r - 1.0 + s0 * std::exp(-lambda * (r - r0)); };

  // f is convex with f(1) >= 0; the largest root sits right of its minimum.
  double lo = 0.0;
  if (lambda > 0.0 && s0 > 0.0) lo = std::clamp(r0 + std::log(lambda * s0) / lambda, 0.0, 1.0);
  if (!(f(lo) < 0.0)) return {1.0 - s0, false};
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return {0.5 * (lo + hi), true};
}

}  // namespace sirenv::meanfield
