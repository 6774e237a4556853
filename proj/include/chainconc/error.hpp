#pragma once

#include <stdexcept>
#include <string>

namespace chainconc {

// Base for every error raised by the library. The CLI maps subclasses to
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input (bad probabilities, shape mismatch, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Conditioning on an event of probability zero.
class ZeroProbability : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// An exhaustive enumeration would exceed the configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

// An iterative routine did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace chainconc
