#pragma once

#include <stdexcept>
#include <string>

namespace ocsolve {

enum class ErrorCode {
  NonFiniteState,
  DimensionMismatch,
  MissingStepCache,
  IndefiniteR,
  NonConvexTerminal,
  InfeasibleIterate,
  AreSolveFailed,
  InvalidArgument,
  Io,
};

[[nodiscard]] inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteState:
      return "non_finite_state";
    case ErrorCode::DimensionMismatch:
      return "dimension_mismatch";
    case ErrorCode::MissingStepCache:
      return "missing_step_cache";
    case ErrorCode::IndefiniteR:
      return "indefinite_r";
    case ErrorCode::NonConvexTerminal:
      return "non_convex_terminal";
    case ErrorCode::InfeasibleIterate:
      return "infeasible_iterate";
    case ErrorCode::AreSolveFailed:
      return "are_solve_failed";
    case ErrorCode::InvalidArgument:
      return "invalid_argument";
    case ErrorCode::Io:
      return "io";
  }
  return "unknown";
}

/// All library failures are reported through this exception type; `code()`
/// identifies the failure class so callers can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace ocsolve
