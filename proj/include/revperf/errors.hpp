#pragma once

#include <stdexcept>
#include <string>

namespace revperf {

/// Base for every error raised by the library. The CLI exits with code 3 for
/// NumericalError, IllConditionedError and DegenerateModelError and with
/// code 2 for every other Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// A function that must be monotone was not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid model specification (e.g. a covariance that is not PSD).
class ModelError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public Error {
 public:
  using Error::Error;
};

class DegenerateModelError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::string detail)
      : Error("config field '" + field + "': " + detail), field_(std::move(field)), detail_(std::move(detail)) {}
  const std::string& field() const noexcept { return field_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string field_;
  std::string detail_;
};

}  // namespace revperf
