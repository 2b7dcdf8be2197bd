#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rpomdp {

/// Unknown state, action, observation or variable, or a malformed history.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An uncertainty set (possibly after constraining) has no member.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A nature choice that does not agree with the fixed partial assignment.
class InvalidChoiceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition on policies was violated (invalid or non-finitely randomizing).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Belief update with an observation that has probability zero.
class ImpossibleObservationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An enumeration would exceed the configured cap.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, std::size_t count)
      : std::runtime_error(what), count_(count) {}
  /// The number of objects the enumeration would have produced.
  std::size_t count() const noexcept { return count_; }

 private:
  std::size_t count_;
};

/// Syntax or semantic error in a model or policy document.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + reason),
        line_(line),
        column_(column),
        reason_(reason) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string reason_;
};

}  // namespace rpomdp
