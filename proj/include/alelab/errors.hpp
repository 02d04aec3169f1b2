#pragma once

#include <stdexcept>
#include <string>

namespace alelab {

/// Invalid or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (wrong frame, missing parity, ...).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

/// Solver failure, non-convergence or non-finite values.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProjectionDomainError : DomainError {
  using DomainError::DomainError;
};

struct ProjectionAmbiguityError : DomainError {
  using DomainError::DomainError;
};

struct KernelConstructionError : NumericError {
  using NumericError::NumericError;
};

struct GaugeDistanceError : NumericError {
  using NumericError::NumericError;
};

struct FlowBlowupError : NumericError {
  using NumericError::NumericError;
};

struct NonContractionError : NumericError {
  using NumericError::NumericError;
};

}  // namespace alelab
