#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twoscale {

/// Rejected input: bad mesh sizes, non-monotone rates, malformed config.
/// The CLI maps this family to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during a solve.  The CLI maps this family to exit code 2.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reaction rates whose ranges cannot be matched (exactly one of the two
/// volume rates is identically zero), so no invariant envelope exists.
class DegenerateKinetics : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A diffusivity at or below its ellipticity floor.
class EllipticityViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Config file problem; remembers the 1-based line it came from (-1 if the
/// problem is not tied to a single line).
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& what, int line_number = -1)
      : ValidationError(what), line(line_number) {}
  int line;
};

/// Newton loop exhausted its iteration or damping budget.
class NewtonFailure : public SolverError {
 public:
  NewtonFailure(const std::string& what, double residual)
      : SolverError(what), last_residual(residual) {}
  double last_residual;
};

/// Fixed-point loop failed to contract; carries the residual history so the
/// caller can decide whether a shorter slab would help.
class ContractionFailure : public SolverError {
 public:
  ContractionFailure(const std::string& what, std::vector<double> history)
      : SolverError(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// Direct factorization reported a singular or indefinite system.
class SingularSystem : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace twoscale
