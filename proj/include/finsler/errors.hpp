#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Base class for every recoverable failure raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A derivative was requested that the jet does not track.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Reciprocal, sqrt or fractional power hit a zero or negative constant term.
class SingularError : public Error {
 public:
  SingularError(const std::string& what, double value)
      : Error(what + " (constant term " + std::to_string(value) + ")"), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// The evaluation point lies outside the metric's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation undefined in the requested dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient configuration, e.g. x parallel to y where a 2-plane is needed.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// A Finsler axiom or a construction-time invariant does not hold.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler
