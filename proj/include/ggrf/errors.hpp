#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ggrf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structurally invalid input (bad shapes, violated preconditions, duplicate edges).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: divergent series, singular solve, non-finite loss.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ggrf
