#pragma once

#include <stdexcept>
#include <string>

namespace photonmux {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the range where a model is defined (e.g. a frequency
/// outside the dispersion validity window).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input that carries no information to work with (all-zero spectrum, empty sweep).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Two spectra that were expected to share a grid do not.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// A counting estimator whose denominator vanishes.
class EstimatorError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace photonmux
