#include "dq/value.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>

namespace dq {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string int128_to_string(__int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::string out;
  while (u != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) out.push_back('-');
  return {out.rbegin(), out.rend()};
}

// Parses exactly `n` digits at `pos`.
std::optional<int> fixed_digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (!is_digit(c)) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

std::string_view to_string(DataType t) {
  switch (t) {
    case DataType::text: return "text";
    case DataType::integer: return "integer";
    case DataType::decimal: return "decimal";
    case DataType::boolean: return "boolean";
    case DataType::timestamp: return "timestamp";
  }
  return "?";
}

std::optional<DataType> data_type_from_string(std::string_view s) {
  for (auto t : {DataType::text, DataType::integer, DataType::decimal, DataType::boolean,
                 DataType::timestamp}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

bool is_numeric(DataType t) { return t == DataType::integer || t == DataType::decimal; }

// ---------------------------------------------------------------------------
// Decimal

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    neg = text[i] == '-';
    ++i;
  }
  std::size_t int_start = i;
  __int128 int_part = 0;
  while (i < text.size() && is_digit(text[i])) {
    if (i - int_start >= 26) return std::nullopt;
    int_part = int_part * 10 + (text[i] - '0');
    ++i;
  }
  if (i == int_start) return std::nullopt;
  __int128 frac = 0;
  int frac_digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::size_t frac_start = i;
    while (i < text.size() && is_digit(text[i])) {
      if (++frac_digits > kScaleDigits) return std::nullopt;
      frac = frac * 10 + (text[i] - '0');
      ++i;
    }
    if (i == frac_start) return std::nullopt;
  }
  if (i != text.size()) return std::nullopt;
  for (int d = frac_digits; d < kScaleDigits; ++d) frac *= 10;
  __int128 raw = int_part * kScale + frac;
  return Decimal(neg ? -raw : raw);
}

std::optional<std::int64_t> Decimal::to_int() const {
  if (!is_integral()) return std::nullopt;
  __int128 v = raw_ / kScale;
  if (v > INT64_MAX || v < INT64_MIN) return std::nullopt;
  return static_cast<std::int64_t>(v);
}

double Decimal::to_double() const {
  // Integer and fractional parts separately keep small values exact.
  __int128 ip = raw_ / kScale;
  __int128 fp = raw_ % kScale;
  return static_cast<double>(ip) + static_cast<double>(fp) / 1e12;
}

std::string Decimal::to_string() const {
  __int128 a = raw_ < 0 ? -raw_ : raw_;
  std::string out = int128_to_string(a / kScale);
  __int128 frac = a % kScale;
  if (frac != 0) {
    std::string f = int128_to_string(frac);
    f.insert(0, static_cast<std::size_t>(kScaleDigits) - f.size(), '0');
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += '.';
    out += f;
  }
  if (raw_ < 0) out.insert(0, 1, '-');
  return out;
}

std::optional<Decimal> Decimal::add(Decimal o) const {
  __int128 r;
  if (__builtin_add_overflow(raw_, o.raw_, &r)) return std::nullopt;
  return Decimal(r);
}

std::optional<Decimal> Decimal::sub(Decimal o) const {
  __int128 r;
  if (__builtin_sub_overflow(raw_, o.raw_, &r)) return std::nullopt;
  return Decimal(r);
}

std::optional<Decimal> Decimal::mul(Decimal o) const {
  // (a/S)*(b/S) = (a*b)/S/S; split one operand to delay overflow.
  __int128 ai = raw_ / kScale;
  __int128 af = raw_ % kScale;
  __int128 hi;
  __int128 lo;
  if (__builtin_mul_overflow(ai, o.raw_, &hi)) return std::nullopt;
  if (__builtin_mul_overflow(af, o.raw_, &lo)) return std::nullopt;
  __int128 r;
  if (__builtin_add_overflow(hi, lo / kScale, &r)) return std::nullopt;
  return Decimal(r);
}

std::optional<Decimal> Decimal::div(Decimal o) const {
  if (o.raw_ == 0) return std::nullopt;
  __int128 num;
  if (__builtin_mul_overflow(raw_, kScale, &num)) return std::nullopt;
  return Decimal(num / o.raw_);
}

std::optional<Decimal> Decimal::mod(Decimal o) const {
  if (o.raw_ == 0) return std::nullopt;
  return Decimal(raw_ % o.raw_);
}

// ---------------------------------------------------------------------------
// Timestamp

std::optional<Timestamp> Timestamp::parse(std::string_view s) {
  using namespace std::chrono;
  auto y = fixed_digits(s, 0, 4);
  if (!y || s.size() < 20 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto mo = fixed_digits(s, 5, 2);
  auto d = fixed_digits(s, 8, 2);
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
  auto h = fixed_digits(s, 11, 2);
  auto mi = fixed_digits(s, 14, 2);
  auto se = fixed_digits(s, 17, 2);
  if (!mo || !d || !h || !mi || !se || s[13] != ':' || s[16] != ':') return std::nullopt;
  if (*h > 23 || *mi > 59 || *se > 59) return std::nullopt;
  year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  std::int64_t frac = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && is_digit(s[pos])) {
      if (++digits > 6) return std::nullopt;
      frac = frac * 10 + (s[pos] - '0');
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int i = digits; i < 6; ++i) frac *= 10;
  }
  if (pos >= s.size()) return std::nullopt;
  std::int64_t offset_seconds = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int sign = s[pos] == '-' ? -1 : 1;
    auto oh = fixed_digits(s, pos + 1, 2);
    auto om = fixed_digits(s, pos + 4, 2);
    if (!oh || !om || pos + 3 >= s.size() || s[pos + 3] != ':' || *oh > 23 || *om > 59) {
      return std::nullopt;
    }
    offset_seconds = sign * (*oh * 3600 + *om * 60);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  std::int64_t days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  std::int64_t secs = days_since_epoch * 86400 + *h * 3600 + *mi * 60 + *se - offset_seconds;
  return Timestamp{secs * kMicrosPerSecond + frac};
}

std::string Timestamp::to_string() const {
  using namespace std::chrono;
  std::int64_t days_part = micros / kMicrosPerDay;
  std::int64_t rem = micros % kMicrosPerDay;
  if (rem < 0) {
    rem += kMicrosPerDay;
    --days_part;
  }
  year_month_day ymd{sys_days{days{days_part}}};
  std::int64_t secs = rem / kMicrosPerSecond;
  std::int64_t frac = rem % kMicrosPerSecond;
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02lld:%02lld:%02lld",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long long>(secs / 3600),
                static_cast<long long>((secs / 60) % 60), static_cast<long long>(secs % 60));
  std::string out(buf.data());
  if (frac != 0) {
    std::snprintf(buf.data(), buf.size(), ".%06lld", static_cast<long long>(frac));
    std::string f(buf.data());
    while (f.back() == '0') f.pop_back();
    out += f;
  }
  out += 'Z';
  return out;
}

std::optional<std::int64_t> parse_duration(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t unit = kMicrosPerDay;
  std::string_view number = text;
  switch (text.back()) {
    case 'd': unit = kMicrosPerDay; number.remove_suffix(1); break;
    case 'h': unit = 3600 * kMicrosPerSecond; number.remove_suffix(1); break;
    case 'm': unit = 60 * kMicrosPerSecond; number.remove_suffix(1); break;
    case 's': unit = kMicrosPerSecond; number.remove_suffix(1); break;
    default: break;
  }
  std::int64_t n = 0;
  auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), n);
  if (ec != std::errc{} || ptr != number.data() + number.size() || n < 0) return std::nullopt;
  std::int64_t out;
  if (__builtin_mul_overflow(n, unit, &out)) return std::nullopt;
  return out;
}

std::string format_duration(std::int64_t micros) {
  struct Unit {
    std::int64_t size;
    char suffix;
  };
  for (auto u : {Unit{kMicrosPerDay, 'd'}, Unit{3600 * kMicrosPerSecond, 'h'},
                 Unit{60 * kMicrosPerSecond, 'm'}, Unit{kMicrosPerSecond, 's'}}) {
    if (micros % u.size == 0) return std::to_string(micros / u.size) + u.suffix;
  }
  // Sub-second durations cannot be written; round down to whole seconds.
  return std::to_string(micros / kMicrosPerSecond) + 's';
}

// ---------------------------------------------------------------------------
// Value

std::optional<DataType> Value::type() const {
  switch (v_.index()) {
    case 1: return DataType::text;
    case 2: return DataType::integer;
    case 3: return DataType::decimal;
    case 4: return DataType::boolean;
    case 5: return DataType::timestamp;
    default: return std::nullopt;
  }
}

std::optional<Decimal> Value::numeric() const {
  if (auto* i = integer()) return Decimal::from_int(*i);
  if (auto* d = decimal()) return *d;
  return std::nullopt;
}

std::string Value::to_string() const {
  struct Visitor {
    std::string operator()(Null) const { return "null"; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(Decimal d) const { return d.to_string(); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(Timestamp t) const { return t.to_string(); }
  };
  return std::visit(Visitor{}, v_);
}

std::optional<std::strong_ordering> compare(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return std::nullopt;
  if (auto* x = a.integer()) {
    if (auto* y = b.integer()) return *x <=> *y;
  }
  auto na = a.numeric();
  auto nb = b.numeric();
  if (na && nb) return *na <=> *nb;
  if (a.storage().index() != b.storage().index()) return std::nullopt;
  if (auto* x = a.text()) return x->compare(*b.text()) <=> 0;
  if (auto* x = a.boolean()) return *x <=> *b.boolean();
  if (auto* x = a.timestamp()) return x->micros <=> b.timestamp()->micros;
  return std::nullopt;
}

bool same_value(const Value& a, const Value& b) {
  auto c = compare(a, b);
  return c && *c == std::strong_ordering::equal;
}

std::size_t SameValueHash::operator()(const Value& v) const {
  struct Visitor {
    std::size_t operator()(Null) const { return 0x9e3779b97f4a7c15ULL; }
    std::size_t operator()(const std::string& s) const { return std::hash<std::string>{}(s); }
    std::size_t operator()(std::int64_t i) const { return (*this)(Decimal::from_int(i)); }
    std::size_t operator()(Decimal d) const {
      auto raw = static_cast<unsigned __int128>(d.scaled());
      auto lo = static_cast<std::uint64_t>(raw);
      auto hi = static_cast<std::uint64_t>(raw >> 64);
      return std::hash<std::uint64_t>{}(lo ^ (hi * 0x9e3779b97f4a7c15ULL));
    }
    std::size_t operator()(bool b) const { return b ? 1 : 2; }
    std::size_t operator()(Timestamp t) const { return std::hash<std::int64_t>{}(t.micros) ^ 0x55; }
  };
  return std::visit(Visitor{}, v.storage());
}

std::optional<Value> parse_cell(std::string_view text, DataType type) {
  switch (type) {
    case DataType::text: return Value(std::string(text));
    case DataType::integer: {
      std::int64_t v = 0;
      std::string_view t = text;
      if (!t.empty() && t.front() == '+') t.remove_prefix(1);
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
      return Value(v);
    }
    case DataType::decimal: {
      auto d = Decimal::parse(text);
      if (!d) return std::nullopt;
      return Value(*d);
    }
    case DataType::boolean:
      if (text == "true") return Value(true);
      if (text == "false") return Value(false);
      return std::nullopt;
    case DataType::timestamp: {
      auto t = Timestamp::parse(text);
      if (!t) return std::nullopt;
      return Value(*t);
    }
  }
  return std::nullopt;
}

std::optional<Value> coerce(const Value& literal, DataType target) {
  if (literal.is_null()) return std::nullopt;
  if (literal.type() == target) return literal;
  if (auto* s = literal.text()) return parse_cell(*s, target);
  if (target == DataType::decimal) {
    if (auto n = literal.numeric()) return Value(*n);
  }
  if (target == DataType::integer) {
    if (auto* d = literal.decimal()) {
      if (auto i = d->to_int()) return Value(*i);
    }
  }
  return std::nullopt;
}

}  // namespace dq
