#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "dq/error.hpp"

namespace dq {

class PatternError : public Error {
 public:
  PatternError(std::string message, std::size_t offset);
  [[nodiscard]] std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Uniform draw in [0, bound).
using BoundedDraw = std::function<std::uint64_t(std::uint64_t bound)>;

/// A regular expression in the portable dialect: literals, `.`, bracket
/// classes with ranges, `\d \w \s \D \W \S`, escaped metacharacters,
/// `^`/`$` anchors, greedy quantifiers `* + ? {n} {n,} {n,m}`, alternation
/// and grouping (`(...)`, `(?:...)`). Backreferences, lookaround, lazy or
/// possessive quantifiers, word boundaries and POSIX bracket names are
/// rejected.
///
/// Input is UTF-8. `.` and negated classes consume one code point; `.` does
/// not match `\n`. Matching is always against the whole string.
///
/// Compiled patterns are immutable and safe to share between threads.
class Pattern {
 public:
  /// Throws PatternError.
  static Pattern compile(std::string_view source);

  [[nodiscard]] bool full_match(std::string_view text) const;
  [[nodiscard]] const std::string& source() const;

  /// Random string accepted by the pattern, or nullopt if sampling could not
  /// produce one (e.g. anchors in impossible positions).
  [[nodiscard]] std::optional<std::string> sample(const BoundedDraw& draw) const;

  /// True if matching runs on a precomputed DFA (vs. NFA simulation).
  [[nodiscard]] bool uses_dfa() const;

  struct Impl;

 private:
  explicit Pattern(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace dq
