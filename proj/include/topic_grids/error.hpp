#pragma once

#include <stdexcept>
#include <string>

namespace topic_grids {

// Input length is not compatible with the requested grid.
class SizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input violates an operation's preconditions.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative numerics produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// Broken internal invariant; indicates a bug rather than bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Log ingestion failed (too many malformed lines, empty input).
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace topic_grids
