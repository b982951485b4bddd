#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlrules {

/// Malformed input text (dataset rows, rule lines, model files).
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  /// 1-based line number, 0 if not tied to a line.
  [[nodiscard]] std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Well-formed input that violates a domain rule (non-binary label, unknown value, ...).
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace mlrules
