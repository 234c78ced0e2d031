#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lowrank {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes disagree, or a count such as the rank is out of range.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter value (probability, fraction, tolerance, step size) is invalid.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible is (numerically) singular.
class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(const std::string& what, std::ptrdiff_t index = -1)
      : Error(what), index_(index) {}

  /// Row or system index that failed, or -1 when not applicable.
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

/// An iterative kernel hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Configuration text rejected by the parser. Carries the 1-based line number.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line)
      : Error(what + " at line " + std::to_string(line)), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace lowrank
