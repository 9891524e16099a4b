#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dq/error.hpp"
#include "dq/pattern.hpp"
#include "dq/value.hpp"

namespace dq {

// Row predicate language used by `where` filters, `predicate` rules and
// freshness conditions. Grammar (keywords are case-insensitive):
//
//   expr       = or ;
//   or         = and { "or" and } ;
//   and        = not { "and" not } ;
//   not        = "not" not | comparison ;
//   comparison = sum [ cmp_op sum | "is" [ "not" ] "null" ] ;
//   cmp_op     = "=" | "==" | "!=" | "<>" | "<" | "<=" | ">" | ">=" | "≠" | "≤" | "≥" ;
//   sum        = product { ("+" | "-") product } ;
//   product    = unary { ("*" | "/" | "%" | "mod" | "×" | "÷") unary } ;
//   unary      = "-" unary | primary ;
//   primary    = literal | identifier | call | "(" expr ")" ;
//   call       = function "(" [ expr { "," expr } ] ")" ;
//   literal    = integer | decimal | "'" text "'" | "timestamp" "'" rfc3339 "'"
//              | "true" | "false" | "null" ;
//   identifier = letter { letter | digit | "_" } | '"' text '"' ;
//
// Nulls propagate through arithmetic, comparisons and functions; and/or/not
// use three-valued logic.

enum class UnaryOp { logical_not, negate, is_null, is_not_null };
enum class BinaryOp { eq, ne, lt, le, gt, ge, logical_and, logical_or, add, sub, mul, div, mod };
enum class Function {
  len,
  upper,
  lower,
  substr,
  abs,
  regex_match,
  date_diff_days,
  age_days,
  in_set,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  struct Literal {
    Value value;
  };
  struct Column {
    std::string name;
  };
  struct Unary {
    UnaryOp op;
    ExprPtr operand;
  };
  struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };
  struct Call {
    Function fn;
    std::vector<ExprPtr> args;
    std::optional<Pattern> pattern;  // compiled second argument of regex_match
  };

  std::variant<Literal, Column, Unary, Binary, Call> node;
};

/// Throws ParseError; line is always 1 and column is the 1-based offset
/// into `text`.
[[nodiscard]] ExprPtr parse_expr(std::string_view text);

/// Canonical text. parse_expr(to_text(e)) prints back identically.
[[nodiscard]] std::string to_text(const Expr& e);

[[nodiscard]] bool same_expr(const ExprPtr& a, const ExprPtr& b);

/// Column names referenced anywhere in the expression, sorted, unique.
[[nodiscard]] std::vector<std::string> referenced_columns(const Expr& e);

/// Static type of an expression; `null_type` is the type of a bare null.
enum class ExprType { null_type, text, integer, decimal, boolean, timestamp };

[[nodiscard]] std::string_view to_string(ExprType t);

class TypeError : public Error {
 public:
  using Error::Error;
};

using ColumnTypeLookup = std::function<std::optional<DataType>(std::string_view)>;

/// Throws TypeError on unknown columns or ill-typed operands.
ExprType check_expr(const Expr& e, const ColumnTypeLookup& columns);

/// Columnar view of one row.
struct RowRef {
  const std::vector<std::vector<Value>>* columns = nullptr;
  std::size_t row = 0;
  [[nodiscard]] const Value& operator[](std::size_t column) const {
    return (*columns)[column][row];
  }
};

struct EvalContext {
  Timestamp reference_time;
};

/// An expression with column names resolved to positions. Evaluation is pure.
class BoundExpr {
 public:
  using ColumnIndexLookup = std::function<std::optional<std::size_t>(std::string_view)>;

  /// Throws UnknownColumn.
  BoundExpr(ExprPtr expr, const ColumnIndexLookup& columns);

  [[nodiscard]] Value eval(const RowRef& row, const EvalContext& ctx) const;
  /// True only when the expression evaluates to boolean true.
  [[nodiscard]] bool holds(const RowRef& row, const EvalContext& ctx) const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
};

}  // namespace dq
