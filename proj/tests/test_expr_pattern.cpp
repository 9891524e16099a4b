#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "dq/expr.hpp"
#include "dq/pattern.hpp"

namespace dq {
namespace {

std::string random_pattern(std::mt19937_64& rng, int depth = 0) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  static const std::vector<std::string> atoms{"a", "b", "c", "1", ".", "[a-b]", "[^b]", "\\d", "\\w", "[0-9c]", "\\."};
  static const std::vector<std::string> quants{"", "", "", "*", "+", "?", "{2}", "{1,3}", "{0,}"};
  std::string out;
  const std::size_t n = 1 + pick(4);
  for (std::size_t i = 0; i < n; ++i) {
    std::string atom;
    if (depth < 2 && pick(5) == 0) {
      atom = "(" + random_pattern(rng, depth + 1) + "|" + random_pattern(rng, depth + 1) + ")";
    } else {
      atom = atoms[pick(atoms.size())];
    }
    out += atom + quants[pick(quants.size())];
  }
  return out;
}

std::string random_text(std::mt19937_64& rng) {
  static const std::string alphabet = "abc1.2 _";
  std::string s;
  const std::size_t n = rng() % 7;
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
  return s;
}

TEST(PatternOracle, AgreesWithStdRegex) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    std::string src = random_pattern(rng);
    Pattern p = Pattern::compile(src);
    std::regex oracle(src, std::regex::ECMAScript);
    for (int k = 0; k < 40; ++k) {
      std::string text = random_text(rng);
      EXPECT_EQ(p.full_match(text), std::regex_match(text, oracle)) << "pattern " << src << " text '" << text << "'";
    }
    auto draw = [&](std::uint64_t bound) { return rng() % bound; };
    if (auto s = p.sample(draw)) {
      EXPECT_TRUE(std::regex_match(*s, oracle)) << "sample '" << *s << "' of " << src;
    }
  }
}

TEST(Pattern, DocumentedExamples) {
  Pattern dni = Pattern::compile("^[0-9]{8}[A-Z]$");
  EXPECT_TRUE(dni.full_match("12345678A"));
  EXPECT_FALSE(dni.full_match("1234"));
  EXPECT_FALSE(dni.full_match("12345678a"));
  Pattern any = Pattern::compile("a.c");
  EXPECT_TRUE(any.full_match("a\xc3\xa9""c"));  // one code point
  EXPECT_FALSE(any.full_match("a\nc"));
  EXPECT_THROW((void)Pattern::compile("(a"), PatternError);
  EXPECT_THROW((void)Pattern::compile("(a)\\1"), PatternError);
  EXPECT_THROW((void)Pattern::compile("a*?"), PatternError);
  EXPECT_THROW((void)Pattern::compile("(?=a)"), PatternError);
}

std::vector<std::vector<Value>> table(std::vector<std::vector<Value>> cols) { return cols; }

Value eval_on(const std::string& text, const std::vector<std::vector<Value>>& cols,
              const std::vector<std::string>& names, std::size_t row = 0) {
  BoundExpr e(parse_expr(text), [&](std::string_view c) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == c) return i;
    }
    return std::nullopt;
  });
  EvalContext ctx{*Timestamp::parse("2024-01-01T00:00:00Z")};
  return e.eval(RowRef{&cols, row}, ctx);
}

TEST(Expr, ParseAndPrintRoundTrip) {
  for (const std::string text :
       {"a + b * 2 > 10 and not c is null", "regex_match(code, '[A-Z]{2}')", "in_set(x, 'a', 'b''c', 3)",
        "age_days(t) <= 30 or \"weird col\" = timestamp '2024-01-01T00:00:00Z'", "-x % 3 <> 1",
        "(a or b) and c", "len(upper(s)) >= 2.50"}) {
    ExprPtr e = parse_expr(text);
    std::string printed = to_text(*e);
    EXPECT_EQ(to_text(*parse_expr(printed)), printed) << text;
    EXPECT_TRUE(same_expr(e, parse_expr(printed))) << text;
  }
  EXPECT_THROW((void)parse_expr("a +"), ParseError);
  EXPECT_THROW((void)parse_expr("nosuchfn(a)"), ParseError);
  EXPECT_THROW((void)parse_expr("regex_match(a, b)"), ParseError);
}

TEST(Expr, ThreeValuedLogicAndNullPropagation) {
  auto cols = table({{Value(5), Value()}, {Value(true), Value()}});
  std::vector<std::string> names{"n", "f"};
  EXPECT_EQ(eval_on("n > 3", cols, names), Value(true));
  EXPECT_TRUE(eval_on("n > 3", cols, names, 1).is_null());
  EXPECT_EQ(eval_on("f or n > 3", cols, names, 1), Value());
  EXPECT_EQ(eval_on("false and n > 3", cols, names, 1), Value(false));
  EXPECT_EQ(eval_on("true or n > 3", cols, names, 1), Value(true));
  EXPECT_EQ(eval_on("n is null", cols, names, 1), Value(true));
  EXPECT_EQ(eval_on("n + 1.5", cols, names), Value(*Decimal::parse("6.5")));
  EXPECT_EQ(eval_on("in_set(n, 1, 5)", cols, names), Value(true));
}

TEST(Expr, ReferencedColumnsAndTypes) {
  ExprPtr e = parse_expr("b > 1 and a = 'x' or b is null");
  EXPECT_EQ(referenced_columns(*e), (std::vector<std::string>{"a", "b"}));
  auto types = [](std::string_view c) -> std::optional<DataType> {
    if (c == "a") return DataType::text;
    if (c == "b") return DataType::integer;
    return std::nullopt;
  };
  EXPECT_EQ(check_expr(*e, types), ExprType::boolean);
  EXPECT_THROW((void)check_expr(*parse_expr("a + 1"), types), TypeError);
  EXPECT_THROW((void)check_expr(*parse_expr("zz > 1"), types), TypeError);
}

TEST(ExprProperty, EvaluationIsPure) {
  std::mt19937_64 rng(3);
  std::vector<std::vector<Value>> cols(2);
  for (int r = 0; r < 200; ++r) {
    cols[0].push_back(rng() % 5 == 0 ? Value() : Value(static_cast<std::int64_t>(rng() % 100) - 50));
    cols[1].push_back(rng() % 5 == 0 ? Value() : Value(std::string(1 + rng() % 4, 'a' + rng() % 3)));
  }
  std::vector<std::string> names{"n", "s"};
  for (const std::string text : {"n * 2 - 3 > 10 or len(s) = 2", "abs(n) % 7 = 1 and not regex_match(s, 'a+')",
                                 "substr(s, 1, 2) = 'aa' or n is null"}) {
    for (std::size_t r = 0; r < 200; ++r) {
      Value first = eval_on(text, cols, names, r);
      for (int k = 0; k < 3; ++k) EXPECT_EQ(eval_on(text, cols, names, r), first);
    }
  }
}

}  // namespace
}  // namespace dq
