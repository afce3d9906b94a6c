#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stlmc {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  not_converged,
  retries_exhausted,
  reducible_chain,
  not_reversible,
  invalid_partition,
  unsupported_dimension,
  io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::retries_exhausted: return "retries_exhausted";
    case ErrorCode::reducible_chain: return "reducible_chain";
    case ErrorCode::not_reversible: return "not_reversible";
    case ErrorCode::invalid_partition: return "invalid_partition";
    case ErrorCode::unsupported_dimension: return "unsupported_dimension";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

/// Base of every error thrown by the library. `code()` is stable and meant
/// for programmatic dispatch; `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Gradient descent failed to reach the stationarity tolerance from every start.
class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& message, std::vector<double> best_iterate, double best_value,
                    double best_grad_norm)
      : Error(ErrorCode::not_converged, message),
        best_iterate_(std::move(best_iterate)),
        best_value_(best_value),
        best_grad_norm_(best_grad_norm) {}

  const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }
  double best_value() const noexcept { return best_value_; }
  double best_grad_norm() const noexcept { return best_grad_norm_; }

 private:
  std::vector<double> best_iterate_;
  double best_value_;
  double best_grad_norm_;
};

/// The tempering chain never ended on the target level.
class RetriesExhaustedError : public Error {
 public:
  RetriesExhaustedError(const std::string& message, std::size_t attempts,
                        std::vector<std::size_t> final_level_histogram, std::size_t failed_round = 0)
      : Error(ErrorCode::retries_exhausted, message),
        attempts_(attempts),
        final_level_histogram_(std::move(final_level_histogram)),
        failed_round_(failed_round) {}

  std::size_t attempts() const noexcept { return attempts_; }
  /// Entry k counts attempts whose last state was on level k (0-based).
  const std::vector<std::size_t>& final_level_histogram() const noexcept {
    return final_level_histogram_;
  }
  /// Number of levels in the estimation round that failed (0 when not known).
  std::size_t failed_round() const noexcept { return failed_round_; }

 private:
  std::size_t attempts_;
  std::vector<std::size_t> final_level_histogram_;
  std::size_t failed_round_;
};

/// A chain that has more than one closed communicating class.
class ReducibleChainError : public Error {
 public:
  ReducibleChainError(const std::string& message, std::vector<std::vector<std::size_t>> closed_classes)
      : Error(ErrorCode::reducible_chain, message), closed_classes_(std::move(closed_classes)) {}

  const std::vector<std::vector<std::size_t>>& closed_classes() const noexcept {
    return closed_classes_;
  }

 private:
  std::vector<std::vector<std::size_t>> closed_classes_;
};

/// Raised by langevin_step when the drift evaluates to NaN/inf.
class NonFiniteGradientError : public Error {
 public:
  NonFiniteGradientError(const std::string& message, std::vector<double> at)
      : Error(ErrorCode::non_finite, message), at_(std::move(at)) {}

  const std::vector<double>& at() const noexcept { return at_; }

 private:
  std::vector<double> at_;
};

namespace detail {

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace detail

}  // namespace stlmc
