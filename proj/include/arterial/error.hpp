#pragma once

#include <stdexcept>
#include <string>

namespace arterial {

/// Malformed or inconsistent configuration (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or unusable data encountered at runtime (maps to CLI exit code 1).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A raw traversal observation that cannot produce a valid speed.
class RejectedSample : public DataError {
 public:
  using DataError::DataError;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace arterial
