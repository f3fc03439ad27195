#pragma once

#include <stdexcept>
#include <string>

namespace afcsim {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed or physically inconsistent (bad matrix, unsorted stream, corrupt fixture).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An iterative fit ran out of iterations or diverged. Distinct from DataError.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration failed schema validation. `field` is the dotted path of the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace afcsim
