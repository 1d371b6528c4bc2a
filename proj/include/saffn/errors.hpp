#pragma once

#include <stdexcept>
#include <string>

namespace saffn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor dimensions do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (group counts, kernel kinds, crop sizes, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf encountered where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. calling backward on a non-scalar.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (PGM, checkpoint, manifest).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace saffn
