#pragma once

#include <stdexcept>
#include <string>

namespace pathspin {

// Root of every error raised by this library. Argument validation failures
// use std::invalid_argument directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonHermitianObservable : public Error {
 public:
  using Error::Error;
};

// A projection landed on a (numerically) empty branch, so the conditional
// state does not exist.
class DegenerateBranch : public Error {
 public:
  using Error::Error;
};

class InvalidSampleCount : public Error {
 public:
  using Error::Error;
};

class TooManySettings : public Error {
 public:
  using Error::Error;
};

class SolverStall : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace pathspin
