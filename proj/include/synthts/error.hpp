#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace synthts {

/// Base class for every error raised by the library. Callers that only care
/// about "the input was bad" catch this; the CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters, shapes, or preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Optimization produced a non-finite value.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Malformed or corrupted file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Tensor or architecture shapes do not agree.
class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace synthts
