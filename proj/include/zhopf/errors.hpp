#pragma once

#include <stdexcept>
#include <string>

namespace zhopf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: parameters outside the domain of a formula, malformed requests.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Parameters are valid but the construction degenerates (singular change,
/// missing equilibrium branch, vanishing denominator).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// A closed-form field with a 1/r prefactor was evaluated on the axis r = 0
/// where the limit does not exist.
class AxisSingularError : public Error {
 public:
  using Error::Error;
};

/// dθ/dt vanished (or nearly) so θ cannot serve as the independent variable.
class ReparametrizationError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical procedure failed to reach its target.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// The trajectory left the finite doubles.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace zhopf
