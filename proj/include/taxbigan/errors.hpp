#pragma once

#include <stdexcept>
#include <string>

namespace taxbigan {

// Mismatched matrix/layer/parameter dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation was called in the wrong order (e.g. backward before forward).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A value outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Bad user-supplied data: malformed files, empty datasets, invalid configs.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or document (a usage error rather than bad data).
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

// Training produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace taxbigan
