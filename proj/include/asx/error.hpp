#pragma once

#include <stdexcept>
#include <string>

namespace asx {

/// Base class for all library failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain (z <= 0, r = 0, non-positive k0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (tolerances, grids, flag combinations).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// k_z^2 crossed the negative real axis while continuing k_z away from the saddle.
class BranchError : public Error {
 public:
  using Error::Error;
};

/// A quadrature did not reach its accuracy target.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A spectrum could not be evaluated at the requested point.
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace asx
