#pragma once

#include <stdexcept>
#include <string>

namespace lakenet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point set, index list or keypoint set has the wrong number of elements.
class CardinalityError : public Error {
 public:
  using Error::Error;
};

/// Tensor operands have incompatible shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A file did not match the expected schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Configuration is inconsistent or refers to a missing artifact.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A configuration key that no TrainingConfig field carries.
class UnknownKeyError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A loss or activation became NaN or infinite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lakenet
