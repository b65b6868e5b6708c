#pragma once

#include <stdexcept>
#include <string>

namespace qpath {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad index, shape mismatch, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The computation itself failed: non-finite propagation, decode residual
/// above threshold, negative variance beyond round-off.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration. `field()` names the
/// offending key as a JSON-pointer-like path.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

} // namespace qpath
