#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epictrl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed setup: bad mesh sizes, misaligned delay, shape mismatch, unreadable config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The model assumptions that validation can reject. Each maps to one message.
enum class Assumption {
  SigmaPositive,
  PhiEPositive,
  PhiRPositive,
  GammaNonnegative,
  GammaShape,
  KappaBounds,
  KappaRange,
  InitialNonnegative,
  ControlBoundsNonnegative,
  ControlAdmissible,
  ThresholdPositive,
  RPositivityStep,
};

std::string_view assumption_name(Assumption a);
std::string_view assumption_message(Assumption a);

/// A violated structural assumption of the model.
class ValidationError : public Error {
 public:
  explicit ValidationError(Assumption a, const std::string& detail = {});

  Assumption assumption() const { return assumption_; }

 private:
  Assumption assumption_;
};

/// Linear-solve failure or a broken runtime invariant (negative population, NaN).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Caller violated an operation precondition (inadmissible perturbation, missing levels).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Snapshot or table file does not match the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace epictrl
