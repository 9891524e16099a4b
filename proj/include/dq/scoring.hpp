#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dq/engine.hpp"
#include "dq/taxonomy.hpp"

namespace dq {

/// Band boundaries t1 < t2 < t3 < t4, all in (0, 100).
struct LevelThresholds {
  std::array<double, 4> bounds{20, 40, 70, 85};

  [[nodiscard]] bool valid() const;
  friend bool operator==(const LevelThresholds&, const LevelThresholds&) = default;
};

/// Level 1..5: [0,t1) [t1,t2) [t2,t3) [t3,t4) [t4,100]. Throws OutOfRange
/// for values outside [0,100].
[[nodiscard]] int value_to_level(double v, const LevelThresholds& t = {});

enum class Aggregation { micro, macro };
[[nodiscard]] std::string_view to_string(Aggregation a);

struct PropertyValue {
  std::optional<double> value;  // nullopt: not evaluated
  std::uint64_t sum_a = 0;
  std::uint64_t sum_b = 0;
  std::size_t rule_count = 0;
  std::size_t applicable_rules = 0;
};

/// micro: 100·ΣA/ΣB. macro: 100·mean(A_i/B_i). Measures with B = 0 are
/// left out. Throws MixedProperty if the measures span properties.
[[nodiscard]] PropertyValue property_value(std::span<const RuleMeasure* const> measures,
                                           Aggregation mode = Aggregation::micro);

/// c[0..4] = number of properties at levels 1..5.
using Profile = std::array<std::size_t, 5>;

/// Throws OutOfRange for levels outside 1..5.
[[nodiscard]] Profile make_profile(std::span<const int> levels);

/// caps[r][l-1] for ranges r = 0..5 and levels l = 1..4; nullopt is
/// unbounded. Range 0 always matches and yields level 0.
struct ProfilingTable {
  using Row = std::array<std::optional<std::size_t>, 4>;
  std::array<Row, 6> caps{};

  /// The example table for three properties.
  static ProfilingTable example();
  /// The example table with every cap of 3 replaced by n, then clamped to n.
  static ProfilingTable scaled(std::size_t n);

  /// Caps non-increasing in r for each level; range 0 unbounded.
  [[nodiscard]] bool valid() const;
  friend bool operator==(const ProfilingTable&, const ProfilingTable&) = default;
};

/// Highest range r in 5..1 whose caps hold for the cumulative counts
/// c_1 + ... + c_l at every level l = 1..4; 0 if none.
[[nodiscard]] int profile_to_level(const Profile& p, const ProfilingTable& table);

struct PropertyScore {
  PropertyId property = PropertyId::syntactic_accuracy;
  std::optional<double> value;
  std::optional<int> level;
  std::uint64_t sum_a = 0;
  std::uint64_t sum_b = 0;
  std::size_t rule_count = 0;
};

struct CharacteristicResult {
  CharacteristicId characteristic = CharacteristicId::accuracy;
  Profile profile{};
  std::optional<int> level;  // nullopt: no evaluated property
  std::vector<PropertyId> strengths;
  std::vector<PropertyId> weaknesses;
};

struct Verdict {
  enum class Status { eligible, not_eligible, not_evaluated };
  Status status = Status::not_evaluated;
  /// Evaluated characteristics below level 3.
  std::vector<std::pair<CharacteristicId, int>> reasons;
};

[[nodiscard]] std::string_view to_string(Verdict::Status s);

inline constexpr int kCertificationLevel = 3;
inline constexpr int kStrengthLevel = 4;
inline constexpr int kWeaknessLevel = 2;

/// Eligible iff every evaluated characteristic reaches level 3. Throws
/// NothingEvaluated when no characteristic was evaluated.
[[nodiscard]] Verdict certification_eligibility(std::span<const CharacteristicResult> results);

struct ScoringConfig {
  LevelThresholds thresholds;
  /// Overrides per characteristic; others use ProfilingTable::scaled(n).
  std::map<CharacteristicId, ProfilingTable> profiles;
  Aggregation aggregation = Aggregation::micro;

  [[nodiscard]] const ProfilingTable* profile_for(CharacteristicId c) const;

  friend bool operator==(const ScoringConfig&, const ScoringConfig&) = default;
};

/// `{"thresholds": [4 numbers], "profiles": {"Accuracy": 6x4 caps with
/// null = unbounded}, "aggregation": "micro"|"macro"}`; every key optional.
/// Throws ParseError.
[[nodiscard]] ScoringConfig parse_scoring_config(std::string_view document);
[[nodiscard]] nlohmann::json scoring_config_to_json(const ScoringConfig& c);
[[nodiscard]] ScoringConfig scoring_config_from_json(const nlohmann::json& j);

struct ScoreResult {
  std::vector<PropertyScore> properties;  // properties with at least one rule, taxonomy order
  std::vector<CharacteristicResult> characteristics;  // characteristics with at least one rule
  Verdict verdict;
};

[[nodiscard]] ScoreResult score_all(const MeasureSet& ms, const RuleSet& rs,
                                    const ScoringConfig& config = {});

}  // namespace dq
