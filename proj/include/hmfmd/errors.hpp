#pragma once

#include <stdexcept>
#include <string>

namespace hmfmd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared where finite values are required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed external data (CSV, parameter documents, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Metric undefined for the given data (e.g. AUC on a single class).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent inputs when building a dataset.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmfmd
