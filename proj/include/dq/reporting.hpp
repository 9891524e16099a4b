#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dq/dataset.hpp"
#include "dq/engine.hpp"
#include "dq/scoring.hpp"

namespace dq {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kReportFormat = "dq-evaluation-report/1";
inline constexpr std::string_view kComparisonFormat = "dq-comparison-report/1";

struct ReportMetadata {
  std::string ruleset_name;
  std::string ruleset_version;
  std::string ruleset_fingerprint;
  std::string snapshot_fingerprint;
  Timestamp reference_time;
  std::string tool_version;
  nlohmann::json config = nlohmann::json::object();

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct ReportScope {
  std::map<std::string, std::size_t> rows;  // entity -> row count
  std::map<CharacteristicId, std::size_t> rules_per_characteristic;
  std::size_t rule_count = 0;

  friend bool operator==(const ReportScope&, const ReportScope&) = default;
};

struct MeasureSummary {
  std::string rule_id;
  std::string entity;
  PropertyId property = PropertyId::syntactic_accuracy;
  KindTag kind = KindTag::not_null;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t failing_count = 0;

  friend bool operator==(const MeasureSummary&, const MeasureSummary&) = default;
};

struct ReportProperty {
  PropertyId property = PropertyId::syntactic_accuracy;
  std::optional<double> value;  // rounded to 4 decimals
  std::optional<int> level;
  std::uint64_t sum_a = 0;
  std::uint64_t sum_b = 0;
  std::size_t rule_count = 0;

  friend bool operator==(const ReportProperty&, const ReportProperty&) = default;
};

struct EvaluationReport {
  ReportMetadata metadata;
  ReportScope scope;
  std::vector<MeasureSummary> measures;  // sorted by rule id
  std::vector<ReportProperty> properties;
  std::vector<CharacteristicResult> characteristics;
  Verdict verdict;

  [[nodiscard]] const ReportProperty* property(PropertyId p) const;
  [[nodiscard]] const CharacteristicResult* characteristic(CharacteristicId c) const;
};

bool operator==(const CharacteristicResult& a, const CharacteristicResult& b);
bool operator==(const Verdict& a, const Verdict& b);
bool operator==(const EvaluationReport& a, const EvaluationReport& b);

/// Rounds half away from zero to 4 decimals; never returns -0.
[[nodiscard]] double round4(double v);
/// A/B rendered with 4 decimals, rounded half up ("0.7500").
[[nodiscard]] std::string ratio_text(std::uint64_t a, std::uint64_t b);

struct ReportInputs {
  const RuleSet* ruleset = nullptr;
  const Repository* repository = nullptr;
  const MeasureSet* measures = nullptr;
  const ScoreResult* scores = nullptr;
  /// Stored verbatim as metadata.config.
  nlohmann::json config = nlohmann::json::object();
  std::string tool_version{kToolVersion};
};

[[nodiscard]] EvaluationReport build_report(const ReportInputs& in);

[[nodiscard]] nlohmann::json report_to_json(const EvaluationReport& r);
/// Throws ParseError on a malformed document.
[[nodiscard]] EvaluationReport report_from_json(const nlohmann::json& j);
/// Canonical bytes: sorted keys, two-space indent, trailing newline.
[[nodiscard]] std::string serialize_report(const EvaluationReport& r);
[[nodiscard]] EvaluationReport parse_report(std::string_view document);

// Improvement manifests --------------------------------------------------

struct ManifestRule {
  std::string rule_id;
  KindTag kind = KindTag::not_null;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  /// Failing items of this rule within the manifest's entity.
  std::uint64_t failing_count = 0;
  std::vector<RecordRef> refs;  // sorted, capped
  bool truncated = false;
  /// Expression selecting the failing rows of this entity; absent for
  /// relational and entity-level kinds.
  std::optional<std::string> selector;

  friend bool operator==(const ManifestRule&, const ManifestRule&) = default;
};

struct ImprovementManifest {
  std::string entity;
  PropertyId property = PropertyId::syntactic_accuracy;
  std::optional<int> property_level;
  bool weakness = false;
  std::vector<std::string> key_columns;
  std::vector<ManifestRule> rules;  // rule id order

  [[nodiscard]] std::string file_name() const;
  friend bool operator==(const ImprovementManifest&, const ImprovementManifest&) = default;
};

/// One manifest per (entity, property) holding rules with failures. Throws
/// FingerprintMismatch when the report and the measures disagree.
[[nodiscard]] std::vector<ImprovementManifest> build_improvement(const EvaluationReport& report,
                                                                 const MeasureSet& ms,
                                                                 const RuleSet& rs,
                                                                 const SchemaCatalog& catalog);

[[nodiscard]] nlohmann::json manifest_to_json(const ImprovementManifest& m);
[[nodiscard]] nlohmann::json manifest_index(const EvaluationReport& report,
                                            const std::vector<ImprovementManifest>& manifests);
/// Writes every manifest plus index.json into `dir` (created if needed).
void write_manifests(const std::filesystem::path& dir, const EvaluationReport& report,
                     const std::vector<ImprovementManifest>& manifests);

/// Selector for the failing rows of `rule` on `entity`, or nullopt when the
/// kind has no row-local form.
[[nodiscard]] std::optional<std::string> failing_selector(const Rule& rule, const std::string& entity,
                                                          const SchemaCatalog& catalog,
                                                          const RuleSet& rs);

// Comparison -------------------------------------------------------------

struct PropertyDelta {
  PropertyId property = PropertyId::syntactic_accuracy;
  std::optional<double> first;
  std::optional<double> second;
  std::optional<double> value_delta;
  std::optional<int> first_level;
  std::optional<int> second_level;
  std::optional<int> level_delta;

  friend bool operator==(const PropertyDelta&, const PropertyDelta&) = default;
};

struct CharacteristicDelta {
  CharacteristicId characteristic = CharacteristicId::accuracy;
  std::optional<int> first;
  std::optional<int> second;
  std::optional<int> level_delta;

  friend bool operator==(const CharacteristicDelta&, const CharacteristicDelta&) = default;
};

struct ComparisonReport {
  std::string ruleset_name;
  std::string first_version;
  std::string second_version;
  std::vector<PropertyDelta> properties;  // shared properties, taxonomy order
  std::vector<PropertyId> added;
  std::vector<PropertyId> removed;
  std::vector<CharacteristicDelta> characteristics;  // shared characteristics
  std::vector<CharacteristicId> added_characteristics;
  std::vector<CharacteristicId> removed_characteristics;
  bool regression = false;
  Verdict::Status first_verdict = Verdict::Status::not_evaluated;
  Verdict::Status second_verdict = Verdict::Status::not_evaluated;

  friend bool operator==(const ComparisonReport&, const ComparisonReport&) = default;
};

/// Deltas are second - first. Throws ScopeMismatch when the ruleset names
/// differ or the evaluated characteristic sets are disjoint.
[[nodiscard]] ComparisonReport compare(const EvaluationReport& first, const EvaluationReport& second);

[[nodiscard]] nlohmann::json comparison_to_json(const ComparisonReport& c);
[[nodiscard]] std::string serialize_comparison(const ComparisonReport& c);

[[nodiscard]] std::string render_text(const EvaluationReport& r);
[[nodiscard]] std::string render_text(const ComparisonReport& c);

}  // namespace dq
