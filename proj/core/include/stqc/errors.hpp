#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stqc {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected inputs: bad dimensions, infeasible parameters, failed
/// construction-time checks. The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A runtime invariant broke mid-simulation. The CLI maps these to exit
/// code 3; they indicate a bug or a certificate that did not hold.
class InvariantBreachError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Config document rejected; the message names the offending key path.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotSchurError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotControllableError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SynthesisError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The interval [1/N, 1/alpha) is empty; carries the smallest N that
/// would make it non-empty.
class InfeasibleSigmaError : public ValidationError {
 public:
  InfeasibleSigmaError(const std::string& msg, long minimal_feasible_levels)
      : ValidationError(msg), minimal_feasible_levels_(minimal_feasible_levels) {}
  long minimal_feasible_levels() const { return minimal_feasible_levels_; }

 private:
  long minimal_feasible_levels_;
};

class NonConvergenceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BadIndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BudgetViolationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateTraceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// encode() was handed a value outside the quantization hypercube: the
/// range sequence upstream no longer dominates the true error.
class OutOfRangeError : public InvariantBreachError {
 public:
  using InvariantBreachError::InvariantBreachError;
};

class FrameBreachError : public InvariantBreachError {
 public:
  using InvariantBreachError::InvariantBreachError;
};

}  // namespace stqc
