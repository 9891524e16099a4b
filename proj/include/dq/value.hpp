#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace dq {

enum class DataType { text, integer, decimal, boolean, timestamp };

[[nodiscard]] std::string_view to_string(DataType t);
[[nodiscard]] std::optional<DataType> data_type_from_string(std::string_view s);

/// Exact fixed-point decimal with 12 fractional digits.
class Decimal {
 public:
  static constexpr int kScaleDigits = 12;
  static constexpr __int128 kScale = 1'000'000'000'000;

  constexpr Decimal() = default;

  static Decimal from_int(std::int64_t v) { return Decimal(static_cast<__int128>(v) * kScale); }
  static constexpr Decimal from_scaled(__int128 raw) { return Decimal(raw); }

  /// `[-+]?digits[.digits]`, at most 12 fractional digits, no exponent.
  static std::optional<Decimal> parse(std::string_view text);

  [[nodiscard]] constexpr __int128 scaled() const { return raw_; }
  [[nodiscard]] bool is_integral() const { return raw_ % kScale == 0; }
  [[nodiscard]] std::optional<std::int64_t> to_int() const;
  [[nodiscard]] double to_double() const;

  /// Canonical text: no trailing fractional zeros, no "-0".
  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] std::optional<Decimal> add(Decimal o) const;
  [[nodiscard]] std::optional<Decimal> sub(Decimal o) const;
  [[nodiscard]] std::optional<Decimal> mul(Decimal o) const;
  /// Truncates toward zero at 12 fractional digits; nullopt on division by zero.
  [[nodiscard]] std::optional<Decimal> div(Decimal o) const;
  [[nodiscard]] std::optional<Decimal> mod(Decimal o) const;
  [[nodiscard]] Decimal abs() const { return Decimal(raw_ < 0 ? -raw_ : raw_); }
  [[nodiscard]] Decimal negate() const { return Decimal(-raw_); }

  friend constexpr bool operator==(Decimal a, Decimal b) = default;
  friend constexpr std::strong_ordering operator<=>(Decimal a, Decimal b) {
    return a.raw_ <=> b.raw_;
  }

 private:
  constexpr explicit Decimal(__int128 raw) : raw_(raw) {}
  __int128 raw_ = 0;
};

/// UTC instant with microsecond resolution.
struct Timestamp {
  std::int64_t micros = 0;

  /// RFC 3339 with mandatory offset (`Z` or `+hh:mm`); at most 6 fractional
  /// second digits.
  static std::optional<Timestamp> parse(std::string_view text);
  /// Canonical UTC form `YYYY-MM-DDTHH:MM:SS[.ffffff]Z`, fraction trimmed.
  [[nodiscard]] std::string to_string() const;

  friend constexpr bool operator==(Timestamp a, Timestamp b) = default;
  friend constexpr auto operator<=>(Timestamp a, Timestamp b) = default;
};

inline constexpr std::int64_t kMicrosPerSecond = 1'000'000;
inline constexpr std::int64_t kMicrosPerDay = 86'400 * kMicrosPerSecond;

/// Durations: `<n>d`, `<n>h`, `<n>m`, `<n>s` (integers) or a plain number of
/// days. Returns microseconds.
[[nodiscard]] std::optional<std::int64_t> parse_duration(std::string_view text);
[[nodiscard]] std::string format_duration(std::int64_t micros);

struct Null {
  friend constexpr bool operator==(Null, Null) = default;
};

class Value {
 public:
  using Storage = std::variant<Null, std::string, std::int64_t, Decimal, bool, Timestamp>;

  Value() = default;
  Value(Null) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::int64_t i) : v_(i) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(Decimal d) : v_(d) {}
  Value(bool b) : v_(b) {}
  Value(Timestamp t) : v_(t) {}

  [[nodiscard]] bool is_null() const { return std::holds_alternative<Null>(v_); }
  /// nullopt for Null.
  [[nodiscard]] std::optional<DataType> type() const;

  [[nodiscard]] const std::string* text() const { return std::get_if<std::string>(&v_); }
  [[nodiscard]] const std::int64_t* integer() const { return std::get_if<std::int64_t>(&v_); }
  [[nodiscard]] const Decimal* decimal() const { return std::get_if<Decimal>(&v_); }
  [[nodiscard]] const bool* boolean() const { return std::get_if<bool>(&v_); }
  [[nodiscard]] const Timestamp* timestamp() const { return std::get_if<Timestamp>(&v_); }

  /// Integer or Decimal widened to Decimal.
  [[nodiscard]] std::optional<Decimal> numeric() const;

  [[nodiscard]] const Storage& storage() const { return v_; }

  /// Canonical text of a non-null value (the snapshot cell form, unquoted);
  /// "null" for Null.
  [[nodiscard]] std::string to_string() const;

  /// Structural equality: same alternative and same payload.
  friend bool operator==(const Value& a, const Value& b) = default;

 private:
  Storage v_;
};

/// Ordering between two non-null values of comparable types (numeric with
/// numeric, otherwise same type). nullopt when either side is null or the
/// types are not comparable.
[[nodiscard]] std::optional<std::strong_ordering> compare(const Value& a, const Value& b);

/// Equality used for set membership and indexing: numeric values compare by
/// magnitude across Integer/Decimal. Null never equals anything.
[[nodiscard]] bool same_value(const Value& a, const Value& b);

struct SameValueHash {
  std::size_t operator()(const Value& v) const;
};
struct SameValueEq {
  bool operator()(const Value& a, const Value& b) const { return same_value(a, b); }
};

/// Parses one non-null snapshot cell as `type`.
[[nodiscard]] std::optional<Value> parse_cell(std::string_view text, DataType type);

/// Converts a rule literal to a column type: Integer widens to Decimal,
/// integral Decimal narrows to Integer, Text is parsed as a cell.
[[nodiscard]] std::optional<Value> coerce(const Value& literal, DataType target);

[[nodiscard]] bool is_numeric(DataType t);

}  // namespace dq
