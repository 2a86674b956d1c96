#pragma once

#include <stdexcept>
#include <string>

namespace barylab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, malformed files, violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Structural validation of a space or measure failed.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An LP or transport solve did not reach an optimal certificate.
class SolverError : public Error {
 public:
  using Error::Error;
};

// An iterative construction exhausted its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A configured resource cap (cardinality, runtime) was exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace barylab
