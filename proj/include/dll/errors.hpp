#pragma once

#include <stdexcept>
#include <string>

namespace dll {

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  domain,        // argument outside the mathematical domain
  range,         // outside the documented working range, or overflow
  precondition,  // caller violated a documented precondition
  accuracy,      // quadrature / series did not reach the requested tolerance
  resolution,    // grid too coarse
  truncation,    // computational box too small
  consistency,   // two backends disagree
  labeling,      // ambiguous branch assignment
  continuation,  // branch lost during a sweep
  coverage,      // sweep does not cover the support of a test function
  validity,      // spectral gap closed on the requested parameter range
  construction,  // object failed its own invariants
  invariant      // post-hoc invariant violation (solver bug)
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::range: return "range";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::accuracy: return "accuracy";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::labeling: return "labeling";
    case ErrorKind::continuation: return "continuation";
    case ErrorKind::coverage: return "coverage";
    case ErrorKind::validity: return "validity";
    case ErrorKind::construction: return "construction";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + to_string(kind) + " error: " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures caused by numerical accuracy rather than bad input.
  bool is_numerical() const noexcept {
    switch (kind_) {
      case ErrorKind::accuracy:
      case ErrorKind::resolution:
      case ErrorKind::truncation:
      case ErrorKind::consistency:
      case ErrorKind::labeling:
      case ErrorKind::continuation:
      case ErrorKind::coverage:
      case ErrorKind::invariant:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

/// Accuracy failure that still carries the best estimate that was reached.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& where, const std::string& what, double achieved_value,
                double achieved_error)
      : Error(ErrorKind::accuracy, where,
              what + " (achieved value " + std::to_string(achieved_value) + ", error estimate " +
                  std::to_string(achieved_error) + ")"),
        value_(achieved_value),
        error_(achieved_error) {}

  double achieved_value() const noexcept { return value_; }
  double achieved_error() const noexcept { return error_; }

 private:
  double value_;
  double error_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& where, const std::string& what) {
  throw Error(kind, where, what);
}

inline void require(bool cond, const char* where, const std::string& what) {
  if (!cond) fail(ErrorKind::precondition, where, what);
}

}  // namespace dll
