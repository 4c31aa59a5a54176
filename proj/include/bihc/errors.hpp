#pragma once

#include <stdexcept>
#include <string>

namespace bihc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (t ∉ [0,1], bad order).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Kernel evaluated at coincident points.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A pole of a rational integrand lies too close to the integration segment.
class ProximityError : public Error {
 public:
  ProximityError(const std::string& what, double distance)
      : Error(what), distance_(distance) {}
  double distance() const noexcept { return distance_; }

 private:
  double distance_;
};

/// Iterative numerics failed to converge; carries the worst residual seen.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& matrix, const std::string& what)
      : Error(matrix + ": " + what), matrix_(matrix) {}
  const std::string& matrix() const noexcept { return matrix_; }

 private:
  std::string matrix_;
};

/// Mismatched dimensions or combinatorics between inputs.
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class CancelledError : public Error {
 public:
  using Error::Error;
};

}  // namespace bihc
