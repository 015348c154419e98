#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adsgd {

/// Bad dimensions, out-of-range hyperparameters, malformed configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The problem has no usable structure (e.g. an all-zero design matrix).
class DegenerateProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver produced a non-finite objective.
class Diverged : public std::runtime_error {
 public:
  Diverged(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

/// An iteration cap was hit before the requested duality gap.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, double best_gap)
      : std::runtime_error(what), best_gap_(best_gap) {}
  double best_gap() const noexcept { return best_gap_; }

 private:
  double best_gap_;
};

/// Malformed input file; line numbers are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace adsgd
