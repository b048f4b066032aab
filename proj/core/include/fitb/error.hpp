#pragma once

#include <stdexcept>
#include <string>

namespace fitb {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes do not satisfy an operation's requirements.
struct ShapeError : Error {
  using Error::Error;
};

// A class index, token position or similar is out of range.
struct IndexError : Error {
  using Error::Error;
};

// An operation was called while required state is missing (e.g. a
// parameter without a populated gradient).
struct StateError : Error {
  using Error::Error;
};

// Invalid or contradictory configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or inconsistent input data.
struct DataError : Error {
  using Error::Error;
};

// NaN/Inf or other numeric breakdown.
struct NumericError : Error {
  using Error::Error;
};

// A sequence exceeds a model's maximum supported length.
struct LengthError : Error {
  using Error::Error;
};

// File I/O failures and malformed on-disk artifacts.
struct IoError : Error {
  using Error::Error;
};

// Unknown format version in an on-disk artifact.
struct VersionError : IoError {
  using IoError::IoError;
};

}  // namespace fitb
