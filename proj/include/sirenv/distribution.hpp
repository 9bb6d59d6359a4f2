#pragma once

// Laws for the recovery rate xi and the edge weight rho.
//
// Only families whose moments E X, E 1/X, E 1/X^2 and Laplace transforms have
// closed forms are offered, so the critical rate and the no-spread limits are
// exact. Text syntax (used by config files and CLI flags):
//
//   constant:V
//   uniform:A:B
//   two_point:V1:P1:V2        X = V1 with probability P1, else V2
//   shifted:<base>:+OFFSET    base is constant, uniform or two_point

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include "sirenv/error.hpp"

namespace sirenv {

enum class Role { recovery, weight };

constexpr std::string_view to_string(Role r) noexcept {
  return r == Role::recovery ? "recovery" : "weight";
}

struct Constant {
  double value = 1.0;
  friend bool operator==(const Constant&, const Constant&) = default;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const Uniform&, const Uniform&) = default;
};

struct TwoPoint {
  double v1 = 1.0;
  double p1 = 0.5;
  double v2 = 2.0;
  friend bool operator==(const TwoPoint&, const TwoPoint&) = default;
};

using BaseFamily = std::variant<Constant, Uniform, TwoPoint>;

struct Shifted {
  BaseFamily base;
  double offset = 0.0;
  friend bool operator==(const Shifted&, const Shifted&) = default;
};

using Family = std::variant<Constant, Uniform, TwoPoint, Shifted>;

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view tok, std::string_view context) {
  std::string_view body = tok;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  double value = 0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (body.empty() || ec != std::errc{} || ptr != body.data() + body.size() || !std::isfinite(value))
    throw error(errc::parse_error,
                "expected a finite number but got '" + std::string(tok) + "' in '" + std::string(context) + "'");
  return value;
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// 1/y^2 * (1 - e^{-y}(1+y)) = E[U e^{-yU}] for U uniform on (0,1).
inline double uniform_x_laplace_unit(double y) {
  if (y < 1e-2) {
    // sum_k (-y)^k / (k! (k+2))
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < 8; ++k) {
      sum += term / (k + 2);
      term *= -y / (k + 1);
    }
    return sum;
  }
  return (-std::expm1(-y) - y * std::exp(-y)) / (y * y);
}

// E[e^{-yU}] for U uniform on (0,1).
inline double uniform_laplace_unit(double y) { return y == 0.0 ? 1.0 : -std::expm1(-y) / y; }

}  // namespace detail

class DistSpec {
 public:
  DistSpec() = default;
  DistSpec(Family family, Role role) : family_(std::move(family)), role_(role) {}

  static DistSpec constant(double v, Role r) { return {Constant{v}, r}; }
  static DistSpec uniform(double a, double b, Role r) { return {Uniform{a, b}, r}; }
  static DistSpec two_point(double v1, double p1, double v2, Role r) { return {TwoPoint{v1, p1, v2}, r}; }

  const Family& family() const noexcept { return family_; }
  Role role() const noexcept { return role_; }

  // The law with any shift folded into the base parameters.
  BaseFamily resolved() const {
    return std::visit(detail::overloaded{
                          [](const Shifted& s) -> BaseFamily {
                            return std::visit(detail::overloaded{
                                                  [&](const Constant& c) -> BaseFamily {
                                                    return Constant{c.value + s.offset};
                                                  },
                                                  [&](const Uniform& u) -> BaseFamily {
                                                    return Uniform{u.lo + s.offset, u.hi + s.offset};
                                                  },
                                                  [&](const TwoPoint& t) -> BaseFamily {
                                                    return TwoPoint{t.v1 + s.offset, t.p1, t.v2 + s.offset};
                                                  }},
                                              s.base);
                          },
                          [](const auto& f) -> BaseFamily { return f; }},
                      family_);
  }

  bool is_constant() const { return std::holds_alternative<Constant>(resolved()); }
  bool is_discrete() const { return !std::holds_alternative<Uniform>(resolved()); }

  // Atoms carrying positive mass, or the interval endpoints for uniform.
  double support_min() const {
    return std::visit(detail::overloaded{[](const Constant& c) { return c.value; },
                                         [](const Uniform& u) { return u.lo; },
                                         [](const TwoPoint& t) {
                                           if (t.p1 >= 1.0) return t.v1;
                                           if (t.p1 <= 0.0) return t.v2;
                                           return std::min(t.v1, t.v2);
                                         }},
                      resolved());
  }

  double support_max() const {
    return std::visit(detail::overloaded{[](const Constant& c) { return c.value; },
                                         [](const Uniform& u) { return u.hi; },
                                         [](const TwoPoint& t) {
                                           if (t.p1 >= 1.0) return t.v1;
                                           if (t.p1 <= 0.0) return t.v2;
                                           return std::max(t.v1, t.v2);
                                         }},
                      resolved());
  }

  // Inverse CDF; u in (0,1).
  double quantile(double u) const {
    return std::visit(detail::overloaded{[](const Constant& c) { return c.value; },
                                         [u](const Uniform& d) { return d.lo + (d.hi - d.lo) * u; },
                                         [u](const TwoPoint& t) { return u < t.p1 ? t.v1 : t.v2; }},
                      resolved());
  }

  double cdf(double x) const {
    return std::visit(detail::overloaded{[x](const Constant& c) { return x >= c.value ? 1.0 : 0.0; },
                                         [x](const Uniform& d) {
                                           return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0);
                                         },
                                         [x](const TwoPoint& t) {
                                           return (x >= t.v1 ? t.p1 : 0.0) + (x >= t.v2 ? 1.0 - t.p1 : 0.0);
                                         }},
                      resolved());
  }

  // E f(X) for a discrete law; uniform laws go through the closed forms below.
  template <typename F>
  double expect_discrete(F&& f) const {
    return std::visit(detail::overloaded{[&](const Constant& c) { return f(c.value); },
                                         [&](const TwoPoint& t) {
                                           double acc = 0;
                                           if (t.p1 > 0) acc += t.p1 * f(t.v1);
                                           if (t.p1 < 1) acc += (1 - t.p1) * f(t.v2);
                                           return acc;
                                         },
                                         [](const Uniform&) -> double {
                                           return std::numeric_limits<double>::quiet_NaN();
                                         }},
                      resolved());
  }

  double mean() const {
    const BaseFamily law = resolved();
    if (auto* u = std::get_if<Uniform>(&law)) return 0.5 * (u->lo + u->hi);
    return expect_discrete([](double x) { return x; });
  }

  // E 1/X; requires support bounded away from zero.
  double mean_inverse() const {
    const BaseFamily law = resolved();
    if (auto* u = std::get_if<Uniform>(&law))
      return std::log(u->hi / u->lo) / (u->hi - u->lo);
    return expect_discrete([](double x) { return 1.0 / x; });
  }

  double mean_inverse_sq() const {
    const BaseFamily law = resolved();
    if (auto* u = std::get_if<Uniform>(&law)) return 1.0 / (u->lo * u->hi);
    return expect_discrete([](double x) { return 1.0 / (x * x); });
  }

  // E e^{-sX}, s >= 0.
  double laplace(double s) const {
    const BaseFamily law = resolved();
    if (auto* u = std::get_if<Uniform>(&law))
      return std::exp(-s * u->lo) * detail::uniform_laplace_unit(s * (u->hi - u->lo));
    return expect_discrete([s](double x) { return std::exp(-s * x); });
  }

  // E[X e^{-sX}], s >= 0.
  double x_laplace(double s) const {
    const BaseFamily law = resolved();
    if (auto* u = std::get_if<Uniform>(&law)) {
      const double h = u->hi - u->lo;
      const double y = s * h;
      return std::exp(-s * u->lo) *
             (u->lo * detail::uniform_laplace_unit(y) + h * detail::uniform_x_laplace_unit(y));
    }
    return expect_discrete([s](double x) { return x * std::exp(-s * x); });
  }

  // E[X / (X + k)], k >= 0, X > 0.
  double mean_ratio(double k) const {
    const BaseFamily law = resolved();
    if (auto* u = std::get_if<Uniform>(&law)) {
      if (k == 0) return 1.0;
      return 1.0 - k * std::log((u->hi + k) / (u->lo + k)) / (u->hi - u->lo);
    }
    return expect_discrete([k](double x) { return x / (x + k); });
  }

  std::string to_string() const {
    using detail::format_double;
    auto base_text = [](const BaseFamily& b) {
      return std::visit(
          detail::overloaded{
              [](const Constant& c) { return "constant:" + format_double(c.value); },
              [](const Uniform& u) { return "uniform:" + format_double(u.lo) + ":" + format_double(u.hi); },
              [](const TwoPoint& t) {
                return "two_point:" + format_double(t.v1) + ":" + format_double(t.p1) + ":" + format_double(t.v2);
              }},
          b);
    };
    return std::visit(detail::overloaded{[&](const Shifted& s) {
                                           return "shifted:" + base_text(s.base) + ":" +
                                                  (s.offset >= 0 ? "+" : "") + format_double(s.offset);
                                         },
                                         [&](const auto& f) { return base_text(BaseFamily{f}); }},
                      family_);
  }

  friend bool operator==(const DistSpec& a, const DistSpec& b) {
    return a.role_ == b.role_ && a.family_ == b.family_;
  }

 private:
  Family family_ = Constant{1.0};
  Role role_ = Role::recovery;
};

// Returns the spec unchanged when every parameter and role-dependent support
// constraint holds; throws ParamViolation or SupportViolation otherwise.
inline DistSpec validate_spec(DistSpec spec) {
  const std::string text = spec.to_string();
  auto check_base = [&](const BaseFamily& b) {
    std::visit(detail::overloaded{
                   [&](const Constant& c) {
                     if (!std::isfinite(c.value))
                       throw error(errc::param_violation, "constant value must be finite in '" + text + "'");
                   },
                   [&](const Uniform& u) {
                     if (!std::isfinite(u.lo) || !std::isfinite(u.hi))
                       throw error(errc::param_violation, "uniform bounds must be finite in '" + text + "'");
                     if (!(u.lo < u.hi))
                       throw error(errc::param_violation, "uniform requires a < b in '" + text + "'");
                   },
                   [&](const TwoPoint& t) {
                     if (!std::isfinite(t.v1) || !std::isfinite(t.v2))
                       throw error(errc::param_violation, "two_point values must be finite in '" + text + "'");
                     if (!(t.p1 >= 0.0 && t.p1 <= 1.0))
                       throw error(errc::param_violation, "two_point requires p1 in [0,1] in '" + text + "'");
                   }},
               b);
  };
  std::visit(detail::overloaded{[&](const Shifted& s) {
                                  check_base(s.base);
                                  if (!std::isfinite(s.offset))
                                    throw error(errc::param_violation, "shift offset must be finite in '" + text + "'");
                                },
                                [&](const auto& f) { check_base(BaseFamily{f}); }},
             spec.family());

  const double lo = spec.support_min();
  const double hi = spec.support_max();
  if (spec.role() == Role::recovery) {
    if (lo < 1.0)
      throw error(errc::support_violation, "recovery rate requires xi >= 1 almost surely, but '" + text +
                                               "' puts mass at " + detail::format_double(lo));
  } else {
    if (lo < 0.0 || hi > 1.0)
      throw error(errc::support_violation,
                  "edge weight requires 0 <= rho <= 1 almost surely, but '" + text + "' has support [" +
                      detail::format_double(lo) + ", " + detail::format_double(hi) + "]");
    if (hi <= 0.0)
      throw error(errc::support_violation, "edge weight requires P(rho > 0) > 0, but '" + text + "' is 0 almost surely");
  }
  return spec;
}

namespace detail {

inline BaseFamily parse_base(const std::vector<std::string_view>& tok, std::size_t& pos, std::string_view text) {
  auto need = [&](std::size_t count) {
    if (tok.size() < pos + 1 + count)
      throw error(errc::parse_error, "too few parameters for '" + std::string(tok[pos]) + "' in '" +
                                         std::string(text) + "'");
  };
  auto num = [&](std::size_t i) { return parse_number(tok[i], text); };
  const std::string_view kind = tok[pos];
  if (kind == "constant") {
    need(1);
    BaseFamily b = Constant{num(pos + 1)};
    pos += 2;
    return b;
  }
  if (kind == "uniform") {
    need(2);
    BaseFamily b = Uniform{num(pos + 1), num(pos + 2)};
    pos += 3;
    return b;
  }
  if (kind == "two_point") {
    need(3);
    BaseFamily b = TwoPoint{num(pos + 1), num(pos + 2), num(pos + 3)};
    pos += 4;
    return b;
  }
  throw error(errc::parse_error, "unknown distribution family '" + std::string(kind) +
                                     "' (expected constant, uniform, two_point or shifted) in '" +
                                     std::string(text) + "'");
}

}  // namespace detail

// Parses the text syntax and validates the result for the given role.
inline DistSpec parse_spec(std::string_view text, Role role) {
  const auto tok = detail::split(text, ':');
  std::size_t pos = 0;
  Family family;
  if (tok[0] == "shifted") {
    pos = 1;
    if (tok.size() < 2)
      throw error(errc::parse_error, "shifted requires a base distribution in '" + std::string(text) + "'");
    if (tok[1] == "shifted")
      throw error(errc::parse_error, "nested shifted distributions are not supported in '" + std::string(text) + "'");
    BaseFamily base = detail::parse_base(tok, pos, text);
    if (pos >= tok.size())
      throw error(errc::parse_error, "shifted requires a trailing offset in '" + std::string(text) + "'");
    double offset = detail::parse_number(tok[pos], text);
    ++pos;
    family = Shifted{base, offset};
  } else {
    family = std::visit([](const auto& b) -> Family { return b; }, detail::parse_base(tok, pos, text));
  }
  if (pos != tok.size())
    throw error(errc::parse_error, "unexpected trailing parameters in '" + std::string(text) + "'");
  return validate_spec(DistSpec(family, role));
}

// The three moments that enter the critical rate and the second-moment bounds.
struct Moments {
  double mean_rho = 1.0;
  double mean_inv_xi = 1.0;
  double mean_inv_xi_sq = 1.0;
};

inline Moments moments(const DistSpec& rho, const DistSpec& xi) {
  return {rho.mean(), xi.mean_inverse(), xi.mean_inverse_sq()};
}

inline double critical_lambda(const Moments& m) {
  if (!(m.mean_rho > 0.0) || !(m.mean_inv_xi > 0.0))
    throw error(errc::degenerate_moments, "critical rate needs E rho > 0 and E 1/xi > 0");
  return 1.0 / (m.mean_rho * m.mean_inv_xi);
}

inline double critical_lambda(const DistSpec& rho, const DistSpec& xi) { return critical_lambda(moments(rho, xi)); }

}  // namespace sirenv
