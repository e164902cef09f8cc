#pragma once

#include <stdexcept>
#include <string>

namespace krylovlab {

/// Vectors or operators from different truncations were combined.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A constructor or routine received an out-of-range parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operator kind does not support the requested action
/// (e.g. the adjoint of a domain-extension operator).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The operator does not belong to the class a routine requires
/// (symmetric, skew-symmetric, positive semidefinite).
class WrongClassError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyBasisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failures: non-finite values, indefinite curvature in CG,
/// undefined spectral functions, data outside the range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndefiniteOperatorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotInRangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EvaluationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OracleUnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace krylovlab
