#pragma once

#include <stdexcept>
#include <string>

namespace ringsfwm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// Grid or sample range does not cover the support of a field.
class CoverageError : public Error {
public:
  using Error::Error;
};

/// Two grids that must match do not.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// A numerical result failed its accuracy contract. Carries the best
/// estimate that was reached.
class AccuracyError : public Error {
public:
  AccuracyError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

private:
  double best_estimate_;
  double error_estimate_;
};

/// ODE state became non-finite.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

/// Zero kernel handed to an analysis that needs a normalisable one.
class UndefinedAnalysis : public Error {
public:
  using Error::Error;
};

}  // namespace ringsfwm
