#pragma once

#include <stdexcept>
#include <string>

namespace mpmiqp {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

class AsymmetricMatrixError : public Error {
 public:
  using Error::Error;
};

// A (block-)factorizable spec does not satisfy the positivity assumptions
// needed by the closed-form inverse.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Exhaustive routines refuse inputs beyond their size guard.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

// Internal consistency check failed (e.g. path cost vs. recovered objective).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpmiqp
