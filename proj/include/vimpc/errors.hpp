#pragma once

#include <stdexcept>
#include <string>

namespace vimpc {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Parameter validation
class ValidationError : public Error {
public:
  using Error::Error;
};

/// k_min >= k_max: the stiffness range has no interior.
class DegenerateRange : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// A quantity that must be strictly positive is not.
class NonPositive : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Integration
class HorizonExceeded : public Error {
public:
  using Error::Error;
};

class StepUnderflow : public Error {
public:
  using Error::Error;
};

// Sweep post-processing
class NoCrossing : public Error {
public:
  using Error::Error;
};

class UnderdeterminedFit : public Error {
public:
  using Error::Error;
};

// Configuration / IO
class ConfigError : public Error {
public:
  using Error::Error;
};

class ParseError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class UnknownKey : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace vimpc
