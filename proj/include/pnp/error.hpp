#pragma once

#include <stdexcept>
#include <string>

namespace pnp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: wrong axis, mismatched grids, malformed parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (non-positive
/// weights or concentrations, unrepresentable exponentials).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver hit its iteration cap.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Periodic Poisson right-hand side with a non-negligible mean.
class IncompatibleRhs : public Error {
 public:
  IncompatibleRhs(const std::string& what, double mean) : Error(what), mean_(mean) {}
  double mean() const { return mean_; }

 private:
  double mean_;
};

/// A structural guarantee of the scheme (positivity, conservation) failed.
class PropertyViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace pnp
