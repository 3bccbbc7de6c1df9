#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fusetrack {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad dimensions, out-of-range
/// parameter, non-finite input).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown that the invariants should have excluded.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Scenario or run configuration is malformed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input text could not be parsed. Line and column are 1-based; 0 means
/// unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line,
                            std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

/// Sink or file failure. Carries how many records made it out.
class IoError : public Error {
 public:
  IoError(const std::string& what, std::size_t written = 0)
      : Error(what), written_(written) {}
  std::size_t written() const noexcept { return written_; }

 private:
  std::size_t written_;
};

}  // namespace fusetrack
