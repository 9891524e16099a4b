#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dq/dataset.hpp"
#include "dq/ruleset.hpp"

namespace dq {

inline constexpr std::size_t kFailingCap = 100'000;

/// A failing item: one row, and for column-wise kinds the column inspected.
struct RecordRef {
  std::string entity;
  std::size_t ordinal = 0;
  std::string column;      // empty for row-level and entity-level kinds
  std::vector<Value> key;  // key column values, empty if the entity has no key

  friend bool operator==(const RecordRef&, const RecordRef&) = default;
};

/// Canonical order: entity, ordinal, column.
bool ref_less(const RecordRef& a, const RecordRef& b);

struct RuleMeasure {
  std::string rule_id;
  std::string entity;
  PropertyId property = PropertyId::syntactic_accuracy;
  KindTag kind = KindTag::not_null;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::vector<RecordRef> failing;  // sorted, at most kFailingCap entries
  std::uint64_t failing_count = 0;  // true count before capping
  std::chrono::duration<double> elapsed{0};

  [[nodiscard]] bool applicable() const { return b > 0; }
  /// A/B, or nullopt when not applicable.
  [[nodiscard]] std::optional<double> ratio() const;

  /// Equality of everything except elapsed time.
  [[nodiscard]] bool same_result(const RuleMeasure& o) const;
};

struct MeasureSet {
  std::map<std::string, RuleMeasure> measures;  // by rule id
  std::string snapshot_fingerprint;
  std::string ruleset_fingerprint;

  [[nodiscard]] bool same_result(const MeasureSet& o) const;
};

/// sha256 of the canonical rules document.
[[nodiscard]] std::string ruleset_fingerprint(const RuleSet& rs);

/// Throws EvalError if the rule cannot be bound to the repository.
[[nodiscard]] RuleMeasure eval_rule(const Rule& rule, const Repository& repo, const RuleSet& rs);

/// Evaluates every rule, spreading rules over `jobs` threads. The result
/// does not depend on `jobs`. Throws EvalError naming every rule that failed
/// to bind.
[[nodiscard]] MeasureSet eval_all(const RuleSet& rs, const Repository& repo, unsigned jobs = 1);

}  // namespace dq
