#pragma once

#include <stdexcept>
#include <string>

namespace slspec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not match the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular to tolerance.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double determinant)
      : Error(what), determinant_(determinant) {}
  double determinant() const noexcept { return determinant_; }

 private:
  double determinant_;
};

/// Input vectors are linearly dependent to tolerance.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a path or closed form.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A structural invariant (symmetry, Lagrangian condition, ...) is violated.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Zero is an eigenvalue of the boundary problem, or an equivalent
/// normalizing matrix is singular.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// An oracle declines to produce a reference for this input.
class OracleRefusal : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent job configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace slspec
