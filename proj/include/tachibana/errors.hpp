#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tachibana {

/// Failure categories raised by the library. The CLI maps them to exit codes.
enum class ErrorKind {
  invalid_parameter,
  non_manifold,
  non_orientable,
  degenerate_simplex,
  negative_dual_volume,
  mode_conflict,
  mode_unsupported,
  no_embedding,
  convergence_failure,
  window_too_small,
  oracle_mismatch,
  solver_failure,
  parse_error,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "InvalidParameter";
    case ErrorKind::non_manifold: return "NonManifold";
    case ErrorKind::non_orientable: return "NonOrientable";
    case ErrorKind::degenerate_simplex: return "DegenerateSimplex";
    case ErrorKind::negative_dual_volume: return "NegativeDualVolume";
    case ErrorKind::mode_conflict: return "ModeConflict";
    case ErrorKind::mode_unsupported: return "ModeUnsupported";
    case ErrorKind::no_embedding: return "NoEmbedding";
    case ErrorKind::convergence_failure: return "ConvergenceFailure";
    case ErrorKind::window_too_small: return "WindowTooSmall";
    case ErrorKind::oracle_mismatch: return "OracleMismatch";
    case ErrorKind::solver_failure: return "SolverFailure";
    case ErrorKind::parse_error: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::invalid_parameter, message);
}

}  // namespace tachibana
