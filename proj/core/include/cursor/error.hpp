#pragma once

#include <stdexcept>
#include <string>

namespace cursor {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (sizes, ratios, unknown keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A function was called with arguments that violate its contract.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A work estimate exceeded the configured enumeration budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File was readable but its content is malformed.
class ParseError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace cursor
