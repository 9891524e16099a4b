#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dq/dataset.hpp"
#include "dq/engine.hpp"
#include "dq/ruleset.hpp"

namespace dq {

/// How an unclaimed column (or the compliant side of some kinds) is filled.
struct ColumnGenerator {
  enum class Kind { sequence, pool, pattern, window, int_range, decimal_range };
  Kind kind = Kind::pool;
  std::int64_t start = 1;           // sequence
  std::int64_t step = 1;            // sequence
  std::string prefix;               // sequence over text columns
  std::vector<Value> values;        // pool (coerced at generation)
  std::string pattern;              // pattern
  Timestamp from;                   // window
  Timestamp to;                     // window
  std::int64_t min = 0;             // int_range
  std::int64_t max = 0;             // int_range
  Decimal dmin;                     // decimal_range
  Decimal dmax;                     // decimal_range
  int scale = 2;                    // decimal_range fractional digits
  double null_rate = 0;
};

struct EntityPlan {
  std::size_t rows = 0;
  std::map<std::string, ColumnGenerator> columns;
};

struct ViolationPlan {
  std::string rule_id;
  double rate = 0;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  std::map<std::string, EntityPlan> entities;
  std::vector<ViolationPlan> plans;
};

/// Throws ParseError.
[[nodiscard]] SynthSpec parse_synth_spec(std::string_view document);
[[nodiscard]] nlohmann::json synth_spec_to_json(const SynthSpec& spec);

struct ExpectedMeasure {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  friend bool operator==(const ExpectedMeasure&, const ExpectedMeasure&) = default;
};

using ExpectedMeasures = std::map<std::string, ExpectedMeasure>;

[[nodiscard]] std::string serialize_expected(const ExpectedMeasures& e);
[[nodiscard]] ExpectedMeasures parse_expected(std::string_view document);

struct SynthOutput {
  std::vector<Entity> entities;  // catalog order
  ExpectedMeasures expected;     // every rule without where/condition
};

/// Fills every catalog entity. For each rule with a plan of rate r over n
/// items, exactly llround(r*n) items violate it; unplanned rules comply.
/// Rules carrying a where filter or freshness condition get no expectation
/// and cannot be planned. Throws ConflictingPlan.
[[nodiscard]] SynthOutput generate(const SynthSpec& spec, const SchemaCatalog& catalog,
                                   const RuleSet& rs);

/// Writes `<entity>.csv` files and expected_measures.json into `dir`.
void write_synth_output(const std::filesystem::path& dir, const SynthOutput& out);

struct Discrepancy {
  std::string rule_id;
  std::optional<ExpectedMeasure> expected;
  std::optional<ExpectedMeasure> actual;

  [[nodiscard]] std::string to_string() const;
  friend bool operator==(const Discrepancy&, const Discrepancy&) = default;
};

/// Rules whose engine counts differ from the oracle, plus rules present on
/// one side only. Empty iff every count matches.
[[nodiscard]] std::vector<Discrepancy> expected_vs_actual(const ExpectedMeasures& expected,
                                                          const MeasureSet& ms);

/// A complete fixture: schema, rules and generation spec.
struct Scenario {
  std::string name;
  SchemaCatalog catalog;
  RuleSet rules;
  SynthSpec spec;
};

[[nodiscard]] std::vector<std::string> scenario_names();
/// travel-v1, travel-v2, registry-v1, registry-v2, school-v1, school-v2.
/// Throws Error for an unknown name.
[[nodiscard]] Scenario build_scenario(std::string_view name);

}  // namespace dq
