#include "dq/error.hpp"

namespace dq {

namespace {

std::string located(const std::string& message, std::size_t line, std::size_t column) {
  if (line == 0) return message;
  return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
}

}  // namespace

ParseError::ParseError(std::string message, std::size_t line, std::size_t column)
    : Error(located(message, line, column)), message_(std::move(message)), line_(line), column_(column) {}

LoadError::LoadError(std::string entity, std::size_t row, std::string column, std::string message)
    : Error(entity + " row " + std::to_string(row) + (column.empty() ? "" : " column " + column) +
            ": " + message),
      entity_(std::move(entity)),
      row_(row),
      column_(std::move(column)) {}

}  // namespace dq
