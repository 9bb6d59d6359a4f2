#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sirenv {

enum class errc {
  support_violation,
  param_violation,
  degenerate_moments,
  index_out_of_range,
  self_loop,
  dead_state,
  quadrature_failure,
  step_too_large,
  parse_error,
  io_failure,
};

constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::support_violation: return "SupportViolation";
    case errc::param_violation: return "ParamViolation";
    case errc::degenerate_moments: return "DegenerateMoments";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::self_loop: return "SelfLoop";
    case errc::dead_state: return "DeadState";
    case errc::quadrature_failure: return "QuadratureFailure";
    case errc::step_too_large: return "StepTooLarge";
    case errc::parse_error: return "ParseError";
    case errc::io_failure: return "IoFailure";
  }
  return "Unknown";
}

// Input problems the caller can fix (bad spec, bad flag) versus failures that
// happen while computing. The CLI maps the former to exit 1, the latter to 2.
constexpr bool is_validation(errc code) noexcept {
  switch (code) {
    case errc::support_violation:
    case errc::param_violation:
    case errc::degenerate_moments:
    case errc::index_out_of_range:
    case errc::self_loop:
    case errc::parse_error:
      return true;
    default:
      return false;
  }
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace sirenv
