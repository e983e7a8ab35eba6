#pragma once

#include <stdexcept>
#include <string>

namespace rareis {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configuration or parameter set violates its documented constraints.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (underflow, degenerate bracket, AR envelope).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An iterative scheme did not reach its tolerance; carries the last iterate.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : NumericalError(what), best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

}  // namespace rareis
