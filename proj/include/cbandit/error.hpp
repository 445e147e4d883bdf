#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cbandit {

/// Root of the library's error taxonomy. Every failure raised by cbandit
/// derives from this type so callers can catch a single class.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A node-index list is not contained in the scope it was applied to.
class ScopeError : public Error {
 public:
  using Error::Error;
};

/// Exact inference would exceed the frontier-width guard.
class CapacityError : public Error {
 public:
  CapacityError(std::size_t width, std::size_t limit)
      : Error("frontier width " + std::to_string(width) + " exceeds capacity guard of " +
              std::to_string(limit) + " nodes"),
        width_(width) {}

  std::size_t width() const noexcept { return width_; }

 private:
  std::size_t width_;
};

/// Experiment budget too small for a strategy, or an environment ran dry.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A ratio term has a zero denominator but a nonzero numerator.
class IllPosedError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant (should never surface on valid input).
class InternalError : public Error {
 public:
  using Error::Error;
};

/// BIF syntax or semantic error with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace cbandit
