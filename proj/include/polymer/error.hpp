#pragma once

#include <stdexcept>
#include <string>

namespace polymer {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto exit statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// A precondition on the arguments of an operation does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

// A grid, table or quadrature would exceed the configured memory budget.
class ResourceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "resource"; }
};

// A lattice cell outside the sampled disorder region was requested.
class RegionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "region"; }
};

// An iterative method (tail extrapolation, Newton solve) did not reach its
// tolerance within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "convergence"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

}  // namespace polymer
