#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace raceopt {

enum class ErrorCode {
  invalid_track,
  out_of_domain,
  degenerate_metric,
  invalid_argument,
  negative_normal_force,
  zero_normal_force,
  unsupported_degree,
  duplicate_nodes,
  infeasible_bounds,
  non_monotone_time,
  invalid_scenario,
  solver_failure,
  io_error,
};

std::string_view to_string(ErrorCode code);

/// Base exception carrying a machine-readable code. The message names the
/// violated invariant where one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_track: return "invalid-track";
    case ErrorCode::out_of_domain: return "out-of-domain";
    case ErrorCode::degenerate_metric: return "degenerate-metric";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::negative_normal_force: return "negative-normal-force";
    case ErrorCode::zero_normal_force: return "zero-normal-force";
    case ErrorCode::unsupported_degree: return "unsupported-degree";
    case ErrorCode::duplicate_nodes: return "duplicate-nodes";
    case ErrorCode::infeasible_bounds: return "infeasible-bounds";
    case ErrorCode::non_monotone_time: return "non-monotone-time";
    case ErrorCode::invalid_scenario: return "invalid-scenario";
    case ErrorCode::solver_failure: return "solver-failure";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace raceopt
