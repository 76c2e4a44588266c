#pragma once

#include <stdexcept>
#include <string>

namespace hoigaze {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Array shapes that do not line up for an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values or flags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. calling backward on a non-scalar.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data that is malformed or violates a data invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Filesystem failures. The message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hoigaze
