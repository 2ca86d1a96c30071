#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dampedwave {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The analytic reference solution is not real-valued for the requested damping.
class RegimeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Base class for failures of the numerics themselves (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Raised when a time integration produces non-finite or exploding states.
class BlowUp : public NumericalError {
 public:
  BlowUp(std::size_t step, const std::string& what)
      : NumericalError("step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ConvergenceFailure : public NumericalError {
 public:
  ConvergenceFailure(const std::string& what, double last_value, double gap)
      : NumericalError(what), last_value_(last_value), gap_(gap) {}

  double last_value() const noexcept { return last_value_; }
  double gap() const noexcept { return gap_; }

 private:
  double last_value_;
  double gap_;
};

}  // namespace dampedwave
