#pragma once

#include <stdexcept>
#include <string>

namespace pulsestab {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (tau <= 0, bad ranges).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or arguments.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Splitting failure, non-convergence, blow-up.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Computation finished but its result cannot be trusted (mesh cap etc).
class UnreliableResult : public Error {
 public:
  using Error::Error;
};

}  // namespace pulsestab
