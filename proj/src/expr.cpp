#include "dq/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace dq {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { end, number, text, ident, quoted_ident, op, lparen, rparen, comma };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t offset = 0;
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

constexpr std::array<std::string_view, 9> kKeywords{"and",  "or",    "not",  "is",       "null",
                                                    "true", "false", "mod", "timestamp"};

bool is_keyword(std::string_view s) {
  auto l = lower(s);
  return std::find(kKeywords.begin(), kKeywords.end(), l) != kKeywords.end();
}

[[noreturn]] void syntax_error(const std::string& msg, std::size_t offset) {
  throw ParseError(msg, 1, offset + 1);
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        std::size_t frac = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == frac) syntax_error("digit expected after '.'", i);
      }
      if (i < s.size() && is_ident_char(s[i])) syntax_error("malformed number", start);
      out.push_back({Tok::number, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      std::string body;
      ++i;
      while (true) {
        if (i >= s.size()) syntax_error("unterminated quoted text", start);
        if (s[i] == quote) {
          if (i + 1 < s.size() && s[i + 1] == quote) {
            body += quote;
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        body += s[i++];
      }
      out.push_back({quote == '\'' ? Tok::text : Tok::quoted_ident, std::move(body), start});
      continue;
    }
    if (is_ident_start(c)) {
      while (i < s.size() && is_ident_char(s[i])) ++i;
      out.push_back({Tok::ident, std::string(s.substr(start, i - start)), start});
      continue;
    }
    switch (c) {
      case '(': out.push_back({Tok::lparen, "(", start}); ++i; continue;
      case ')': out.push_back({Tok::rparen, ")", start}); ++i; continue;
      case ',': out.push_back({Tok::comma, ",", start}); ++i; continue;
      default: break;
    }
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 19> kOps{{
        {"==", "="}, {"!=", "!="}, {"<>", "!="}, {"<=", "<="}, {">=", ">="},
        {"\xE2\x89\xA0", "!="}, {"\xE2\x89\xA4", "<="}, {"\xE2\x89\xA5", ">="},
        {"\xC3\x97", "*"}, {"\xC3\xB7", "/"}, {"\xE2\x88\x92", "-"},
        {"=", "="}, {"<", "<"}, {">", ">"}, {"+", "+"}, {"-", "-"}, {"*", "*"}, {"/", "/"},
        {"%", "%"},
    }};
    bool matched = false;
    for (auto [spelling, canonical] : kOps) {
      if (s.substr(i, spelling.size()) == spelling) {
        out.push_back({Tok::op, std::string(canonical), start});
        i += spelling.size();
        matched = true;
        break;
      }
    }
    if (!matched) syntax_error(std::string("unexpected character '") + c + "'", start);
  }
  out.push_back({Tok::end, "", s.size()});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

struct FunctionInfo {
  std::string_view name;
  Function fn;
  std::size_t min_args;
  std::size_t max_args;  // SIZE_MAX: variadic
};

constexpr std::array<FunctionInfo, 9> kFunctions{{
    {"len", Function::len, 1, 1},
    {"upper", Function::upper, 1, 1},
    {"lower", Function::lower, 1, 1},
    {"substr", Function::substr, 2, 3},
    {"abs", Function::abs, 1, 1},
    {"regex_match", Function::regex_match, 2, 2},
    {"date_diff_days", Function::date_diff_days, 2, 2},
    {"age_days", Function::age_days, 1, 1},
    {"in_set", Function::in_set, 2, SIZE_MAX},
}};

const FunctionInfo* find_function(std::string_view name) {
  auto l = lower(name);
  for (const auto& f : kFunctions) {
    if (f.name == l) return &f;
  }
  return nullptr;
}

std::string_view function_name(Function fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

ExprPtr make(Expr::Literal l) { return std::make_shared<const Expr>(Expr{std::move(l)}); }

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : toks_(tokenize(src)) {}

  ExprPtr parse() {
    if (peek().kind == Tok::end) syntax_error("empty expression", 0);
    ExprPtr e = parse_or();
    if (peek().kind != Tok::end) syntax_error("unexpected '" + peek().text + "'", peek().offset);
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }

  bool peek_keyword(std::string_view kw) const {
    return peek().kind == Tok::ident && lower(peek().text) == kw;
  }
  bool peek_op(std::string_view op) const { return peek().kind == Tok::op && peek().text == op; }

  static ExprPtr binary(BinaryOp op, ExprPtr l, ExprPtr r) {
    return std::make_shared<const Expr>(Expr{Expr::Binary{op, std::move(l), std::move(r)}});
  }
  static ExprPtr unary(UnaryOp op, ExprPtr e) {
    return std::make_shared<const Expr>(Expr{Expr::Unary{op, std::move(e)}});
  }

  ExprPtr parse_or() {
    ExprPtr l = parse_and();
    while (peek_keyword("or")) {
      take();
      l = binary(BinaryOp::logical_or, l, parse_and());
    }
    return l;
  }

  ExprPtr parse_and() {
    ExprPtr l = parse_not();
    while (peek_keyword("and")) {
      take();
      l = binary(BinaryOp::logical_and, l, parse_not());
    }
    return l;
  }

  ExprPtr parse_not() {
    if (peek_keyword("not")) {
      take();
      return unary(UnaryOp::logical_not, parse_not());
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    ExprPtr l = parse_sum();
    if (peek().kind == Tok::op) {
      static constexpr std::array<std::pair<std::string_view, BinaryOp>, 6> kCmp{{
          {"=", BinaryOp::eq}, {"!=", BinaryOp::ne}, {"<", BinaryOp::lt},
          {"<=", BinaryOp::le}, {">", BinaryOp::gt}, {">=", BinaryOp::ge}}};
      for (auto [text, op] : kCmp) {
        if (peek().text == text) {
          take();
          ExprPtr r = parse_sum();
          if (peek().kind == Tok::op && (peek().text == "=" || peek().text == "!=" ||
                                          peek().text == "<" || peek().text == "<=" ||
                                          peek().text == ">" || peek().text == ">=")) {
            syntax_error("comparisons cannot be chained", peek().offset);
          }
          return binary(op, l, r);
        }
      }
    }
    if (peek_keyword("is")) {
      take();
      bool negated = false;
      if (peek_keyword("not")) {
        take();
        negated = true;
      }
      if (!peek_keyword("null")) syntax_error("'null' expected after 'is'", peek().offset);
      take();
      return unary(negated ? UnaryOp::is_not_null : UnaryOp::is_null, l);
    }
    return l;
  }

  ExprPtr parse_sum() {
    ExprPtr l = parse_product();
    while (peek_op("+") || peek_op("-")) {
      BinaryOp op = take().text == "+" ? BinaryOp::add : BinaryOp::sub;
      l = binary(op, l, parse_product());
    }
    return l;
  }

  ExprPtr parse_product() {
    ExprPtr l = parse_unary();
    while (peek_op("*") || peek_op("/") || peek_op("%") || peek_keyword("mod")) {
      const Token& t = take();
      BinaryOp op = t.text == "*" ? BinaryOp::mul : t.text == "/" ? BinaryOp::div : BinaryOp::mod;
      l = binary(op, l, parse_unary());
    }
    return l;
  }

  ExprPtr parse_unary() {
    if (peek_op("-")) {
      std::size_t minus_offset = take().offset;
      if (peek().kind == Tok::number) return number_literal(take(), true, minus_offset);
      return unary(UnaryOp::negate, parse_unary());
    }
    return parse_primary();
  }

  static ExprPtr number_literal(const Token& t, bool negative, std::size_t offset) {
    std::string text = negative ? "-" + t.text : t.text;
    if (t.text.find('.') != std::string::npos) {
      auto d = Decimal::parse(text);
      if (!d) syntax_error("decimal literal out of range or over 12 fractional digits", offset);
      return make(Expr::Literal{Value(*d)});
    }
    auto v = parse_cell(text, DataType::integer);
    if (!v) syntax_error("integer literal out of range", offset);
    return make(Expr::Literal{*v});
  }

  ExprPtr parse_primary() {
    const Token& t = take();
    switch (t.kind) {
      case Tok::number: return number_literal(t, false, t.offset);
      case Tok::text: return make(Expr::Literal{Value(t.text)});
      case Tok::quoted_ident:
        return std::make_shared<const Expr>(Expr{Expr::Column{t.text}});
      case Tok::lparen: {
        ExprPtr e = parse_or();
        if (peek().kind != Tok::rparen) syntax_error("')' expected", peek().offset);
        take();
        return e;
      }
      case Tok::ident: return parse_identifier(t);
      case Tok::end: syntax_error("unexpected end of expression", t.offset);
      default: syntax_error("unexpected '" + t.text + "'", t.offset);
    }
  }

  ExprPtr parse_identifier(const Token& t) {
    auto l = lower(t.text);
    if (l == "true") return make(Expr::Literal{Value(true)});
    if (l == "false") return make(Expr::Literal{Value(false)});
    if (l == "null") return make(Expr::Literal{Value()});
    if (l == "timestamp") {
      if (peek().kind != Tok::text) syntax_error("quoted RFC 3339 text expected", peek().offset);
      const Token& lit = take();
      auto ts = Timestamp::parse(lit.text);
      if (!ts) syntax_error("invalid RFC 3339 timestamp '" + lit.text + "'", lit.offset);
      return make(Expr::Literal{Value(*ts)});
    }
    if (peek().kind == Tok::lparen) return parse_call(t);
    if (is_keyword(t.text)) syntax_error("unexpected keyword '" + t.text + "'", t.offset);
    return std::make_shared<const Expr>(Expr{Expr::Column{t.text}});
  }

  ExprPtr parse_call(const Token& name) {
    const FunctionInfo* info = find_function(name.text);
    if (!info) syntax_error("unknown function '" + name.text + "'", name.offset);
    take();  // (
    Expr::Call call{info->fn, {}, std::nullopt};
    if (peek().kind != Tok::rparen) {
      call.args.push_back(parse_or());
      while (peek().kind == Tok::comma) {
        take();
        call.args.push_back(parse_or());
      }
    }
    if (peek().kind != Tok::rparen) syntax_error("')' expected", peek().offset);
    take();
    if (call.args.size() < info->min_args || call.args.size() > info->max_args) {
      syntax_error("wrong number of arguments to " + std::string(info->name), name.offset);
    }
    if (info->fn == Function::regex_match) {
      const auto* lit = std::get_if<Expr::Literal>(&call.args[1]->node);
      if (!lit || !lit->value.text()) {
        syntax_error("regex_match pattern must be a text literal", name.offset);
      }
      try {
        call.pattern = Pattern::compile(*lit->value.text());
      } catch (const PatternError& e) {
        syntax_error(e.what(), name.offset);
      }
    }
    if (info->fn == Function::in_set) {
      for (std::size_t i = 1; i < call.args.size(); ++i) {
        const auto* lit = std::get_if<Expr::Literal>(&call.args[i]->node);
        if (!lit || lit->value.is_null()) {
          syntax_error("in_set members must be non-null literals", name.offset);
        }
      }
    }
    return std::make_shared<const Expr>(Expr{std::move(call)});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

constexpr int kPrecOr = 1;
constexpr int kPrecAnd = 2;
constexpr int kPrecNot = 3;
constexpr int kPrecCmp = 4;
constexpr int kPrecSum = 5;
constexpr int kPrecProduct = 6;
constexpr int kPrecUnary = 7;
constexpr int kPrecPrimary = 8;

int precedence(const Expr& e) {
  if (const auto* u = std::get_if<Expr::Unary>(&e.node)) {
    switch (u->op) {
      case UnaryOp::logical_not: return kPrecNot;
      case UnaryOp::negate: return kPrecUnary;
      default: return kPrecCmp;
    }
  }
  if (const auto* b = std::get_if<Expr::Binary>(&e.node)) {
    switch (b->op) {
      case BinaryOp::logical_or: return kPrecOr;
      case BinaryOp::logical_and: return kPrecAnd;
      case BinaryOp::add:
      case BinaryOp::sub: return kPrecSum;
      case BinaryOp::mul:
      case BinaryOp::div:
      case BinaryOp::mod: return kPrecProduct;
      default: return kPrecCmp;
    }
  }
  if (const auto* l = std::get_if<Expr::Literal>(&e.node)) {
    // A negative number prints with a leading '-', which binds like unary minus.
    if (auto n = l->value.numeric(); n && n->scaled() < 0) return kPrecUnary;
  }
  return kPrecPrimary;
}

std::string_view op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::eq: return "=";
    case BinaryOp::ne: return "!=";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::logical_and: return "and";
    case BinaryOp::logical_or: return "or";
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::mod: return "%";
  }
  return "?";
}

std::string quote(std::string_view s, char q) {
  std::string out(1, q);
  for (char c : s) {
    if (c == q) out += q;
    out += c;
  }
  out += q;
  return out;
}

std::string literal_text(const Value& v) {
  if (v.is_null()) return "null";
  if (const auto* s = v.text()) return quote(*s, '\'');
  if (const auto* t = v.timestamp()) return "timestamp '" + t->to_string() + "'";
  if (const auto* d = v.decimal()) {
    auto s = d->to_string();
    if (s.find('.') == std::string::npos) s += ".0";
    return s;
  }
  return v.to_string();
}

bool plain_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  if (!std::all_of(s.begin(), s.end(), is_ident_char)) return false;
  return !is_keyword(s) && !find_function(s);
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, int min_prec, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    print(child, out);
    out += ')';
  } else {
    print(child, out);
  }
}

void print(const Expr& e, std::string& out) {
  if (const auto* l = std::get_if<Expr::Literal>(&e.node)) {
    out += literal_text(l->value);
  } else if (const auto* c = std::get_if<Expr::Column>(&e.node)) {
    out += plain_identifier(c->name) ? c->name : quote(c->name, '"');
  } else if (const auto* u = std::get_if<Expr::Unary>(&e.node)) {
    switch (u->op) {
      case UnaryOp::logical_not:
        out += "not ";
        print_child(*u->operand, kPrecNot, out);
        break;
      case UnaryOp::negate:
        out += '-';
        print_child(*u->operand, kPrecUnary, out);
        break;
      case UnaryOp::is_null:
      case UnaryOp::is_not_null:
        print_child(*u->operand, kPrecSum, out);
        out += u->op == UnaryOp::is_null ? " is null" : " is not null";
        break;
    }
  } else if (const auto* b = std::get_if<Expr::Binary>(&e.node)) {
    int p = precedence(e);
    bool comparison = p == kPrecCmp;
    print_child(*b->lhs, comparison ? p + 1 : p, out);
    out += ' ';
    out += op_text(b->op);
    out += ' ';
    print_child(*b->rhs, p + 1, out);
  } else if (const auto* call = std::get_if<Expr::Call>(&e.node)) {
    out += function_name(call->fn);
    out += '(';
    for (std::size_t i = 0; i < call->args.size(); ++i) {
      if (i) out += ", ";
      print(*call->args[i], out);
    }
    out += ')';
  }
}

void collect_columns(const Expr& e, std::set<std::string>& out) {
  if (const auto* c = std::get_if<Expr::Column>(&e.node)) {
    out.insert(c->name);
  } else if (const auto* u = std::get_if<Expr::Unary>(&e.node)) {
    collect_columns(*u->operand, out);
  } else if (const auto* b = std::get_if<Expr::Binary>(&e.node)) {
    collect_columns(*b->lhs, out);
    collect_columns(*b->rhs, out);
  } else if (const auto* call = std::get_if<Expr::Call>(&e.node)) {
    for (const auto& a : call->args) collect_columns(*a, out);
  }
}

// ---------------------------------------------------------------------------
// Type checking

ExprType from_data_type(DataType t) {
  switch (t) {
    case DataType::text: return ExprType::text;
    case DataType::integer: return ExprType::integer;
    case DataType::decimal: return ExprType::decimal;
    case DataType::boolean: return ExprType::boolean;
    case DataType::timestamp: return ExprType::timestamp;
  }
  return ExprType::null_type;
}

bool numeric_or_null(ExprType t) {
  return t == ExprType::integer || t == ExprType::decimal || t == ExprType::null_type;
}

bool comparable(ExprType a, ExprType b) {
  if (a == ExprType::null_type || b == ExprType::null_type) return true;
  if (numeric_or_null(a) && numeric_or_null(b)) return true;
  return a == b;
}

void expect(bool ok, const std::string& msg) {
  if (!ok) throw TypeError(msg);
}

void expect_type(ExprType actual, ExprType wanted, std::string_view where) {
  expect(actual == wanted || actual == ExprType::null_type,
         std::string(where) + " expects " + std::string(to_string(wanted)) + ", got " +
             std::string(to_string(actual)));
}

}  // namespace

ExprPtr parse_expr(std::string_view text) { return ExprParser(text).parse(); }

std::string to_text(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return to_text(*a) == to_text(*b);
}

std::vector<std::string> referenced_columns(const Expr& e) {
  std::set<std::string> out;
  collect_columns(e, out);
  return {out.begin(), out.end()};
}

std::string_view to_string(ExprType t) {
  switch (t) {
    case ExprType::null_type: return "null";
    case ExprType::text: return "text";
    case ExprType::integer: return "integer";
    case ExprType::decimal: return "decimal";
    case ExprType::boolean: return "boolean";
    case ExprType::timestamp: return "timestamp";
  }
  return "?";
}

ExprType check_expr(const Expr& e, const ColumnTypeLookup& columns) {
  if (const auto* l = std::get_if<Expr::Literal>(&e.node)) {
    auto t = l->value.type();
    return t ? from_data_type(*t) : ExprType::null_type;
  }
  if (const auto* c = std::get_if<Expr::Column>(&e.node)) {
    auto t = columns(c->name);
    expect(t.has_value(), "unknown column '" + c->name + "'");
    return from_data_type(*t);
  }
  if (const auto* u = std::get_if<Expr::Unary>(&e.node)) {
    ExprType t = check_expr(*u->operand, columns);
    switch (u->op) {
      case UnaryOp::logical_not: expect_type(t, ExprType::boolean, "not"); return ExprType::boolean;
      case UnaryOp::negate:
        expect(numeric_or_null(t), "unary '-' expects a number, got " + std::string(to_string(t)));
        return t;
      default: return ExprType::boolean;
    }
  }
  if (const auto* b = std::get_if<Expr::Binary>(&e.node)) {
    ExprType l = check_expr(*b->lhs, columns);
    ExprType r = check_expr(*b->rhs, columns);
    std::string op(op_text(b->op));
    switch (b->op) {
      case BinaryOp::logical_and:
      case BinaryOp::logical_or:
        expect_type(l, ExprType::boolean, "'" + op + "'");
        expect_type(r, ExprType::boolean, "'" + op + "'");
        return ExprType::boolean;
      case BinaryOp::eq:
      case BinaryOp::ne:
      case BinaryOp::lt:
      case BinaryOp::le:
      case BinaryOp::gt:
      case BinaryOp::ge:
        expect(comparable(l, r), "cannot compare " + std::string(to_string(l)) + " with " +
                                     std::string(to_string(r)));
        return ExprType::boolean;
      default: {
        expect(numeric_or_null(l) && numeric_or_null(r),
               "'" + op + "' expects numbers, got " + std::string(to_string(l)) + " and " +
                   std::string(to_string(r)));
        if (l == ExprType::null_type || r == ExprType::null_type) return ExprType::null_type;
        if (b->op == BinaryOp::div) return ExprType::decimal;
        return (l == ExprType::integer && r == ExprType::integer) ? ExprType::integer
                                                                  : ExprType::decimal;
      }
    }
  }
  const auto& call = std::get<Expr::Call>(e.node);
  std::vector<ExprType> args;
  for (const auto& a : call.args) args.push_back(check_expr(*a, columns));
  std::string fname(function_name(call.fn));
  switch (call.fn) {
    case Function::len: expect_type(args[0], ExprType::text, fname); return ExprType::integer;
    case Function::upper:
    case Function::lower: expect_type(args[0], ExprType::text, fname); return ExprType::text;
    case Function::substr:
      expect_type(args[0], ExprType::text, fname);
      for (std::size_t i = 1; i < args.size(); ++i) expect_type(args[i], ExprType::integer, fname);
      return ExprType::text;
    case Function::abs:
      expect(numeric_or_null(args[0]), "abs expects a number");
      return args[0];
    case Function::regex_match:
      expect_type(args[0], ExprType::text, fname);
      return ExprType::boolean;
    case Function::date_diff_days:
      expect_type(args[0], ExprType::timestamp, fname);
      expect_type(args[1], ExprType::timestamp, fname);
      return ExprType::integer;
    case Function::age_days: expect_type(args[0], ExprType::timestamp, fname); return ExprType::decimal;
    case Function::in_set:
      for (std::size_t i = 1; i < args.size(); ++i) {
        expect(comparable(args[0], args[i]), "in_set member of type " +
                                                 std::string(to_string(args[i])) +
                                                 " not comparable with " +
                                                 std::string(to_string(args[0])));
      }
      return ExprType::boolean;
  }
  return ExprType::null_type;
}

// ---------------------------------------------------------------------------
// Evaluation

struct BoundExpr::Node {
  enum class Kind { literal, column, unary, binary, call };
  Kind kind = Kind::literal;
  Value literal;
  std::size_t column = 0;
  UnaryOp uop = UnaryOp::logical_not;
  BinaryOp bop = BinaryOp::eq;
  Function fn = Function::len;
  std::vector<Node> kids;
  std::optional<Pattern> pattern;
};

namespace {

using BNode = BoundExpr::Node;

BNode bind(const Expr& e, const BoundExpr::ColumnIndexLookup& columns) {
  BNode n;
  if (const auto* l = std::get_if<Expr::Literal>(&e.node)) {
    n.kind = BNode::Kind::literal;
    n.literal = l->value;
  } else if (const auto* c = std::get_if<Expr::Column>(&e.node)) {
    auto idx = columns(c->name);
    if (!idx) throw UnknownColumn("unknown column '" + c->name + "'");
    n.kind = BNode::Kind::column;
    n.column = *idx;
  } else if (const auto* u = std::get_if<Expr::Unary>(&e.node)) {
    n.kind = BNode::Kind::unary;
    n.uop = u->op;
    n.kids.push_back(bind(*u->operand, columns));
  } else if (const auto* b = std::get_if<Expr::Binary>(&e.node)) {
    n.kind = BNode::Kind::binary;
    n.bop = b->op;
    n.kids.push_back(bind(*b->lhs, columns));
    n.kids.push_back(bind(*b->rhs, columns));
  } else {
    const auto& call = std::get<Expr::Call>(e.node);
    n.kind = BNode::Kind::call;
    n.fn = call.fn;
    n.pattern = call.pattern;
    for (const auto& a : call.args) n.kids.push_back(bind(*a, columns));
  }
  return n;
}

std::optional<bool> truth(const Value& v) {
  if (const auto* b = v.boolean()) return *b;
  return std::nullopt;
}

Value from_decimal(std::optional<Decimal> d) { return d ? Value(*d) : Value(); }

Value arithmetic(BinaryOp op, const Value& l, const Value& r) {
  if (l.is_null() || r.is_null()) return {};
  const auto* li = l.integer();
  const auto* ri = r.integer();
  if (li && ri && op != BinaryOp::div) {
    std::int64_t out = 0;
    switch (op) {
      case BinaryOp::add:
        if (__builtin_add_overflow(*li, *ri, &out)) return {};
        return Value(out);
      case BinaryOp::sub:
        if (__builtin_sub_overflow(*li, *ri, &out)) return {};
        return Value(out);
      case BinaryOp::mul:
        if (__builtin_mul_overflow(*li, *ri, &out)) return {};
        return Value(out);
      case BinaryOp::mod:
        if (*ri == 0 || (*li == INT64_MIN && *ri == -1)) return {};
        return Value(*li % *ri);
      default: break;
    }
  }
  auto a = l.numeric();
  auto b = r.numeric();
  if (!a || !b) return {};
  switch (op) {
    case BinaryOp::add: return from_decimal(a->add(*b));
    case BinaryOp::sub: return from_decimal(a->sub(*b));
    case BinaryOp::mul: return from_decimal(a->mul(*b));
    case BinaryOp::div: return from_decimal(a->div(*b));
    case BinaryOp::mod: return from_decimal(a->mod(*b));
    default: return {};
  }
}

// Code point boundaries of a UTF-8 string.
std::vector<std::size_t> code_point_starts(std::string_view s) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  return starts;
}

Value eval_node(const BNode& n, const RowRef& row, const EvalContext& ctx);

Value eval_call(const BNode& n, const RowRef& row, const EvalContext& ctx) {
  Value a0 = eval_node(n.kids[0], row, ctx);
  if (a0.is_null()) return {};
  switch (n.fn) {
    case Function::len: {
      const auto* s = a0.text();
      if (!s) return {};
      return Value(static_cast<std::int64_t>(code_point_starts(*s).size()));
    }
    case Function::upper:
    case Function::lower: {
      const auto* s = a0.text();
      if (!s) return {};
      std::string out = *s;
      for (auto& c : out) {
        auto uc = static_cast<unsigned char>(c);
        if (uc < 0x80) c = static_cast<char>(n.fn == Function::upper ? std::toupper(uc) : std::tolower(uc));
      }
      return Value(std::move(out));
    }
    case Function::substr: {
      const auto* s = a0.text();
      Value start_v = eval_node(n.kids[1], row, ctx);
      const auto* start = start_v.integer();
      if (!s || !start) return {};
      auto starts = code_point_starts(*s);
      std::int64_t count = static_cast<std::int64_t>(starts.size());
      std::int64_t from = std::max<std::int64_t>(*start, 1) - 1;
      std::int64_t length = count;
      if (n.kids.size() == 3) {
        Value len_v = eval_node(n.kids[2], row, ctx);
        const auto* len = len_v.integer();
        if (!len || *len < 0) return {};
        length = *len;
      }
      if (*start < 1) length += *start - 1;  // positions before 1 consume length
      if (from >= count || length <= 0) return Value(std::string());
      std::int64_t to = std::min(count, from + length);
      std::size_t b = starts[static_cast<std::size_t>(from)];
      std::size_t e = to == count ? s->size() : starts[static_cast<std::size_t>(to)];
      return Value(s->substr(b, e - b));
    }
    case Function::abs: {
      if (const auto* i = a0.integer()) {
        if (*i == INT64_MIN) return {};
        return Value(*i < 0 ? -*i : *i);
      }
      if (const auto* d = a0.decimal()) return Value(d->abs());
      return {};
    }
    case Function::regex_match: {
      const auto* s = a0.text();
      if (!s) return {};
      return Value(n.pattern->full_match(*s));
    }
    case Function::date_diff_days: {
      Value b = eval_node(n.kids[1], row, ctx);
      const auto* x = a0.timestamp();
      const auto* y = b.timestamp();
      if (!x || !y) return {};
      return Value((x->micros - y->micros) / kMicrosPerDay);
    }
    case Function::age_days: {
      const auto* t = a0.timestamp();
      if (!t) return {};
      __int128 micros = static_cast<__int128>(ctx.reference_time.micros) - t->micros;
      return Value(Decimal::from_scaled(micros * Decimal::kScale / kMicrosPerDay));
    }
    case Function::in_set: {
      for (std::size_t i = 1; i < n.kids.size(); ++i) {
        if (same_value(a0, n.kids[i].literal)) return Value(true);
      }
      return Value(false);
    }
  }
  return {};
}

Value eval_node(const BNode& n, const RowRef& row, const EvalContext& ctx) {
  switch (n.kind) {
    case BNode::Kind::literal: return n.literal;
    case BNode::Kind::column: return row[n.column];
    case BNode::Kind::unary: {
      Value v = eval_node(n.kids[0], row, ctx);
      switch (n.uop) {
        case UnaryOp::is_null: return Value(v.is_null());
        case UnaryOp::is_not_null: return Value(!v.is_null());
        case UnaryOp::logical_not: {
          auto t = truth(v);
          return t ? Value(!*t) : Value();
        }
        case UnaryOp::negate:
          if (const auto* i = v.integer()) {
            if (*i == INT64_MIN) return {};
            return Value(-*i);
          }
          if (const auto* d = v.decimal()) return Value(d->negate());
          return {};
      }
      return {};
    }
    case BNode::Kind::binary: {
      if (n.bop == BinaryOp::logical_and || n.bop == BinaryOp::logical_or) {
        bool is_and = n.bop == BinaryOp::logical_and;
        auto l = truth(eval_node(n.kids[0], row, ctx));
        // Short-circuit: false and _ = false; true or _ = true.
        if (l && *l != is_and) return Value(*l);
        auto r = truth(eval_node(n.kids[1], row, ctx));
        if (r && *r != is_and) return Value(*r);
        if (l && r) return Value(is_and);
        return {};
      }
      Value l = eval_node(n.kids[0], row, ctx);
      Value r = eval_node(n.kids[1], row, ctx);
      switch (n.bop) {
        case BinaryOp::eq:
        case BinaryOp::ne:
        case BinaryOp::lt:
        case BinaryOp::le:
        case BinaryOp::gt:
        case BinaryOp::ge: {
          auto c = compare(l, r);
          if (!c) return {};
          switch (n.bop) {
            case BinaryOp::eq: return Value(*c == 0);
            case BinaryOp::ne: return Value(*c != 0);
            case BinaryOp::lt: return Value(*c < 0);
            case BinaryOp::le: return Value(*c <= 0);
            case BinaryOp::gt: return Value(*c > 0);
            default: return Value(*c >= 0);
          }
        }
        default: return arithmetic(n.bop, l, r);
      }
    }
    case BNode::Kind::call: return eval_call(n, row, ctx);
  }
  return {};
}

}  // namespace

BoundExpr::BoundExpr(ExprPtr expr, const ColumnIndexLookup& columns)
    : root_(std::make_shared<const Node>(bind(*expr, columns))) {}

Value BoundExpr::eval(const RowRef& row, const EvalContext& ctx) const {
  return eval_node(*root_, row, ctx);
}

bool BoundExpr::holds(const RowRef& row, const EvalContext& ctx) const {
  auto t = truth(eval(row, ctx));
  return t && *t;
}

}  // namespace dq
