#pragma once

#include <stdexcept>
#include <string>

namespace dlcz {

/// Malformed input files (event logs, config, settings, CSV point lists).
/// `line` is 1-based; 0 when the error is not tied to a particular line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Iterative solvers that fail to converge or hit a degenerate problem.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dlcz
