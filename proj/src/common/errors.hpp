#pragma once

#include <stdexcept>
#include <string>

namespace pedplan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A model that violates the POMDP tuple invariants (row sums, finite rewards).
class ModelValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Posterior mass vanished: the observation is incompatible with every state.
class DegenerateBeliefError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NotConvergedError : public Error {
 public:
  using Error::Error;
};

}  // namespace pedplan
