#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stochem {

/// A parameter or statistic left the set on which the model is defined
/// (simplex violation, nonpositive M-step denominator, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke an API precondition: mismatched layouts, out-of-range index,
/// uninitialized solver memory, stale anchor.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed text input. `line()` is 1-based, 0 when not line-specific.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input whose values are out of range.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A solver run stopped because the model raised an error at `iteration()`.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(std::size_t iteration, const std::string& cause)
      : std::runtime_error("solver aborted at iteration " +
                           std::to_string(iteration) + ": " + cause),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace stochem
