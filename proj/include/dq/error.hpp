#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document (rules, schema, config, report). Line/column are
/// 1-based; 0 means the location is unknown.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line = 0, std::size_t column = 0);

  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }
  [[nodiscard]] const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

/// Snapshot file that cannot be coerced to its schema.
class LoadError : public Error {
 public:
  LoadError(std::string entity, std::size_t row, std::string column, std::string message);

  [[nodiscard]] const std::string& entity() const { return entity_; }
  [[nodiscard]] std::size_t row() const { return row_; }
  [[nodiscard]] const std::string& column() const { return column_; }

 private:
  std::string entity_;
  std::size_t row_;
  std::string column_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UnknownColumn : public Error {
 public:
  using Error::Error;
};

/// Internal inconsistency during evaluation: a validated rule that still
/// cannot be bound to the repository. Signals a pipeline bug.
class EvalError : public Error {
 public:
  using Error::Error;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

class MixedProperty : public ScoringError {
 public:
  using ScoringError::ScoringError;
};

class OutOfRange : public ScoringError {
 public:
  using ScoringError::ScoringError;
};

class NothingEvaluated : public ScoringError {
 public:
  using ScoringError::ScoringError;
};

class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

class ScopeMismatch : public Error {
 public:
  using Error::Error;
};

class ConflictingPlan : public Error {
 public:
  using Error::Error;
};

}  // namespace dq
