#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dq/catalog.hpp"
#include "dq/expr.hpp"
#include "dq/pattern.hpp"
#include "dq/taxonomy.hpp"
#include "dq/value.hpp"

namespace dq {

struct EntityColumn {
  std::string entity;
  std::string column;

  /// "entity.column"; the entity part may not contain '.'.
  static std::optional<EntityColumn> parse(std::string_view text);
  [[nodiscard]] std::string to_string() const { return entity + "." + column; }

  friend bool operator==(const EntityColumn&, const EntityColumn&) = default;
  friend auto operator<=>(const EntityColumn&, const EntityColumn&) = default;
};

// Rule kinds. Literal parameters keep the JSON type they were written with
// (Integer, Decimal, Text, Boolean) and are coerced to the column type when
// the rule is bound to a schema.

struct SyntaxCheck {
  Pattern pattern;
};

struct RangeCheck {
  std::optional<Value> min;
  std::optional<Value> max;
  bool min_inclusive = true;
  bool max_inclusive = true;
};

struct DomainCheck {
  std::vector<Value> allowed;
  std::optional<EntityColumn> reference;  // set: allowed is empty
};

struct NotNullCheck {};

struct NoDefaultCheck {
  std::vector<Value> placeholders;
};

struct UniqueCheck {
  std::vector<std::string> key;
};

struct MinCountCheck {
  std::int64_t threshold = 0;
};

struct ForeignKeyCheck {
  EntityColumn referenced;
};

struct FormatClassCheck {
  std::string class_name;
  Pattern pattern;
  std::vector<EntityColumn> extra_targets;
};

struct PredicateCheck {
  ExprPtr expr;
};

struct FreshnessCheck {
  std::string timestamp_column;
  std::int64_t max_age_micros = 0;
  ExprPtr condition;  // may be null
};

struct FrequencyCheck {
  std::string timestamp_column;
  std::int64_t max_gap_micros = 0;
};

using RuleKind =
    std::variant<SyntaxCheck, RangeCheck, DomainCheck, NotNullCheck, NoDefaultCheck, UniqueCheck,
                 MinCountCheck, ForeignKeyCheck, FormatClassCheck, PredicateCheck, FreshnessCheck,
                 FrequencyCheck>;

/// Order matches the RuleKind alternatives.
enum class KindTag {
  syntax,
  range,
  domain,
  not_null,
  no_default,
  unique,
  min_count,
  foreign_key,
  format_class,
  predicate,
  freshness,
  frequency,
};

inline constexpr std::size_t kKindCount = 12;

[[nodiscard]] KindTag tag_of(const RuleKind& k);
[[nodiscard]] std::string_view kind_name(KindTag t);
[[nodiscard]] std::optional<KindTag> kind_from_name(std::string_view s);

/// Entity-level kinds produce a single item (B = 1) per non-empty entity.
[[nodiscard]] bool is_entity_level(KindTag t);

/// Properties a kind may be categorized under.
[[nodiscard]] std::span<const PropertyId> compatible_properties(KindTag t);
[[nodiscard]] bool is_compatible(KindTag t, PropertyId p);

struct Rule {
  std::string id;
  std::string entity;
  std::vector<std::string> columns;
  PropertyId property = PropertyId::syntactic_accuracy;
  RuleKind kind = NotNullCheck{};
  ExprPtr where;  // may be null
  bool skip_null = false;
  std::string description;

  [[nodiscard]] KindTag tag() const { return tag_of(kind); }
};

struct RuleSet {
  std::string name;
  std::string version;
  std::vector<Rule> rules;
  std::map<std::string, std::string> format_classes;  // name -> pattern source
  Timestamp reference_time;

  [[nodiscard]] const Rule* find(std::string_view rule_id) const;
};

/// Equality through the canonical document.
bool operator==(const Rule& a, const Rule& b);
bool operator==(const RuleSet& a, const RuleSet& b);

/// Parses the rules document. Throws ParseError located at the offending
/// rule for: malformed JSON, empty rule list, duplicate ids, unknown
/// property acronyms or kinds, kind/property incompatibility, undefined
/// format classes, malformed expressions or patterns, invalid parameters.
[[nodiscard]] RuleSet parse_ruleset(std::string_view document);

/// Canonical rules document (sorted keys, every field explicit).
[[nodiscard]] std::string serialize_ruleset(const RuleSet& rs);

struct Diagnostic {
  enum class Level { error, warning };
  Level level = Level::error;
  std::string rule_id;
  std::string message;

  /// `LEVEL rule-id: message`
  [[nodiscard]] std::string to_string() const;
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Resolves every rule against the catalog: entities, columns, expression
/// types, foreign-key and domain references, literal coercions. An empty
/// result means the ruleset is evaluable.
[[nodiscard]] std::vector<Diagnostic> validate_ruleset(const RuleSet& rs,
                                                       const SchemaCatalog& catalog);

[[nodiscard]] bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Partition of the rules by property; document order within each list.
[[nodiscard]] std::map<PropertyId, std::vector<const Rule*>> rules_by_property(const RuleSet& rs);

/// (entity, column) pairs a rule inspects cell by cell: its columns on its
/// own entity plus, for format_class, the extra targets.
[[nodiscard]] std::vector<EntityColumn> rule_targets(const Rule& rule);

}  // namespace dq
