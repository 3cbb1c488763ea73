#pragma once

#include <stdexcept>
#include <string>

namespace lab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, malformed configs, dimension mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Operation not available for the given variant (e.g. evaluating a kernel
/// that only carries a spectrum).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure. `measure` carries the achieved tolerance or the
/// condition estimate that triggered the failure, when one exists.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double measure = 0.0)
      : Error(what), measure_(measure) {}
  double measure() const noexcept { return measure_; }

 private:
  double measure_;
};

/// A descent step increased the objective; the caller should reduce the step.
class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Iterates left the representable range.
class InstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace lab
