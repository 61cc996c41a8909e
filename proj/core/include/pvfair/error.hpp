#pragma once

#include <stdexcept>
#include <string>

namespace pvfair {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line and column when known
/// (0 means unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  int line_;
  int column_;
};

/// A value violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to converge.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double last_mismatch)
      : Error(what), last_mismatch_(last_mismatch) {}
  double last_mismatch() const noexcept { return last_mismatch_; }

 private:
  double last_mismatch_;
};

/// Optimization model has no feasible point or the solver gave up.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace pvfair
