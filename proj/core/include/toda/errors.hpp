#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace toda {

/// Base of every error raised by the library. `kind()` is a stable tag used by
/// the command-line tool to map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

  /// True for failures caused by bad inputs rather than by the numerics.
  virtual bool is_validation() const noexcept { return false; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
  bool is_validation() const noexcept override { return true; }
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation-error", what) {}
  bool is_validation() const noexcept override { return true; }
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric-error", what) {}
};

class GaugeViolation : public Error {
 public:
  explicit GaugeViolation(const std::string& what) : Error("gauge-violation", what) {}
};

class SolverFailure : public Error {
 public:
  explicit SolverFailure(const std::string& what) : Error("solver-failure", what) {}
};

class LinearizationSingular : public Error {
 public:
  explicit LinearizationSingular(const std::string& what)
      : Error("linearization-singular", what) {}
};

/// The ODE left the finite regime; `escape_s` is the log-radius where it did.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double escape_s)
      : Error("divergence", what), escape_s_(escape_s) {}
  double escape_s() const noexcept { return escape_s_; }

 private:
  double escape_s_;
};

class FitUnstable : public Error {
 public:
  explicit FitUnstable(const std::string& what) : Error("fit-unstable", what) {}
};

class AccuracyError : public Error {
 public:
  explicit AccuracyError(const std::string& what) : Error("accuracy-error", what) {}
};

class InvalidFamily : public Error {
 public:
  explicit InvalidFamily(const std::string& what) : Error("invalid-family", what) {}
  bool is_validation() const noexcept override { return true; }
};

}  // namespace toda
