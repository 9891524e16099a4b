#include <gtest/gtest.h>

#include "dq/error.hpp"
#include "synth_cases.hpp"

namespace dq {
namespace {

using test::json;

test::KindCase simple_case(double rate, std::size_t rows = 1000) {
  test::KindCase c;
  c.catalog = test::catalog_from(json::array({{{"name", "e"},
                                               {"columns", {{{"name", "id"}, {"type", "integer"}, {"nullable", false}},
                                                            {{"name", "code"}, {"type", "text"}},
                                                            {{"name", "n"}, {"type", "integer"}, {"nullable", false}}}},
                                               {"key", {"id"}}}}));
  c.rules = test::rules_from(json::array({{{"id", "S"}, {"entity", "e"}, {"columns", {"code"}},
                                           {"property", "EXAC_SINT"}, {"kind", "syntax"},
                                           {"params", {{"pattern", "[A-Z]{2}[0-9]{3}"}}}}}));
  c.spec = parse_synth_spec(json{{"seed", 1},
                                 {"entities", {{"e", {{"rows", rows}}}}},
                                 {"plans", {{{"rule_id", "S"}, {"rate", rate}}}}}
                                .dump());
  return c;
}

MeasureSet evaluate(const test::KindCase& c, const SynthOutput& out) {
  return eval_all(c.rules, make_repository(c.catalog, out.entities), 1);
}

TEST(Synth, ExactViolationCount) {
  auto c = simple_case(0.25);
  SynthOutput out = generate(c.spec, c.catalog, c.rules);
  EXPECT_EQ(out.expected.at("S"), (ExpectedMeasure{750, 1000}));
  EXPECT_TRUE(expected_vs_actual(out.expected, evaluate(c, out)).empty());

  auto zero = simple_case(0.0);
  SynthOutput clean = generate(zero.spec, zero.catalog, zero.rules);
  EXPECT_EQ(clean.expected.at("S"), (ExpectedMeasure{1000, 1000}));
  EXPECT_TRUE(expected_vs_actual(clean.expected, evaluate(zero, clean)).empty());
}

TEST(Synth, Deterministic) {
  auto c = simple_case(0.4, 300);
  SynthOutput a = generate(c.spec, c.catalog, c.rules);
  SynthOutput b = generate(c.spec, c.catalog, c.rules);
  ASSERT_EQ(a.entities.size(), b.entities.size());
  EXPECT_EQ(write_entity_csv(a.entities[0]), write_entity_csv(b.entities[0]));
  c.spec.seed = 2;
  EXPECT_NE(write_entity_csv(generate(c.spec, c.catalog, c.rules).entities[0]), write_entity_csv(a.entities[0]));

  test::TempDir d1("synth1");
  test::TempDir d2("synth2");
  write_synth_output(d1.path, a);
  write_synth_output(d2.path, b);
  for (const auto& name : {"e.csv", "expected_measures.json"}) {
    EXPECT_EQ(read_file(d1.path / name), read_file(d2.path / name));
  }
  EXPECT_EQ(parse_expected(read_file(d1.path / "expected_measures.json")), a.expected);
}

TEST(Synth, Discrepancies) {
  auto c = simple_case(0.1, 50);
  SynthOutput out = generate(c.spec, c.catalog, c.rules);
  MeasureSet ms = evaluate(c, out);
  ms.measures.at("S").a -= 1;
  auto d = expected_vs_actual(out.expected, ms);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].rule_id, "S");
  EXPECT_NE(d[0].to_string().find("S"), std::string::npos);

  ExpectedMeasures other{{"X", {1, 1}}, {"Y", {0, 2}}};
  auto disjoint = expected_vs_actual(other, evaluate(c, out));
  EXPECT_EQ(disjoint.size(), 3u);
}

TEST(Synth, SpecRoundTrip) {
  std::string doc = R"({"seed": 9, "entities": {"e": {"rows": 10, "columns": {
      "a": {"kind": "pool", "values": ["x", 2, 1.5, true]},
      "b": {"kind": "window", "from": "2024-01-01T00:00:00Z", "to": "2024-02-01T00:00:00Z", "null_rate": 0.5},
      "c": {"kind": "decimal_range", "min": "0.5", "max": "10", "scale": 1},
      "d": {"kind": "sequence", "start": 5, "step": 2, "prefix": "ID"},
      "f": {"kind": "pattern", "pattern": "[a-z]{3}"},
      "g": {"kind": "int_range", "min": -3, "max": 3}}}},
      "plans": [{"rule_id": "S", "rate": 0.5}]})";
  SynthSpec spec = parse_synth_spec(doc);
  json j = synth_spec_to_json(spec);
  EXPECT_EQ(synth_spec_to_json(parse_synth_spec(j.dump())), j);
  EXPECT_THROW((void)parse_synth_spec(R"({"seed": 1, "plans": [{"rule_id": "S", "rate": 1.5}]})"), ParseError);
  EXPECT_THROW((void)parse_synth_spec(R"({"seed": 1, "extra": 0})"), ParseError);
  EXPECT_THROW((void)parse_synth_spec(R"({"seed": 1, "entities": {"e": {"rows": 1, "columns": {"a": {"kind": "zipf"}}}}})"),
               ParseError);
}

TEST(Synth, ConflictingPlans) {
  auto c = simple_case(0.5, 20);
  // Two rules demanding values for the same cell.
  c.rules = test::rules_from(json::array(
      {{{"id", "S"}, {"entity", "e"}, {"columns", {"code"}}, {"property", "EXAC_SINT"}, {"kind", "syntax"},
        {"params", {{"pattern", "[A-Z]{2}"}}}},
       {{"id", "D"}, {"entity", "e"}, {"columns", {"code"}}, {"property", "EXAC_SEMAN"}, {"kind", "domain"},
        {"params", {{"values", {"AB"}}}}}}));
  EXPECT_THROW((void)generate(c.spec, c.catalog, c.rules), ConflictingPlan);

  auto unknown = simple_case(0.5, 20);
  unknown.spec.plans.push_back({"ghost", 0.1});
  EXPECT_THROW((void)generate(unknown.spec, unknown.catalog, unknown.rules), ConflictingPlan);

  auto non_nullable = simple_case(0.5, 20);
  non_nullable.rules = test::rules_from(json::array(
      {{{"id", "S"}, {"entity", "e"}, {"columns", {"n"}}, {"property", "COMP_REG"}, {"kind", "not_null"}}}));
  EXPECT_THROW((void)generate(non_nullable.spec, non_nullable.catalog, non_nullable.rules), ConflictingPlan);

  auto single_dup = simple_case(0.05, 20);
  single_dup.rules = test::rules_from(json::array(
      {{{"id", "S"}, {"entity", "e"}, {"columns", {"code"}}, {"property", "FAL_COMP_FICH"}, {"kind", "unique"}}}));
  EXPECT_THROW((void)generate(single_dup.spec, single_dup.catalog, single_dup.rules), ConflictingPlan);

  auto filtered = simple_case(0.5, 20);
  filtered.rules = test::rules_from(json::array(
      {{{"id", "S"}, {"entity", "e"}, {"columns", {"code"}}, {"property", "EXAC_SINT"}, {"kind", "syntax"},
        {"params", {{"pattern", "[A-Z]{2}"}}}, {"where", "n > 3"}}}));
  EXPECT_THROW((void)generate(filtered.spec, filtered.catalog, filtered.rules), ConflictingPlan);
}

TEST(SynthProperty, OracleExactForEveryKind) {
  for (KindTag kind : test::kAllKinds) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      test::KindCase c = test::random_kind_case(kind, seed * 1000 + static_cast<std::uint64_t>(kind));
      SynthOutput out = generate(c.spec, c.catalog, c.rules);
      MeasureSet ms = evaluate(c, out);
      auto d = expected_vs_actual(out.expected, ms);
      EXPECT_TRUE(d.empty()) << kind_name(kind) << " seed " << seed << ": " << (d.empty() ? "" : d[0].to_string());
    }
  }
}

TEST(Scenarios, RuleCountsPerCharacteristic) {
  struct Expected {
    std::string name;
    std::size_t entities;
    std::array<std::size_t, 5> per_characteristic;
  };
  for (const auto& e : std::vector<Expected>{{"travel-v1", 14, {89, 78, 91, 54, 63}},
                                             {"registry-v1", 36, {189, 131, 340, 72, 81}},
                                             {"school-v1", 10, {94, 100, 176, 48, 70}}}) {
    Scenario s = build_scenario(e.name);
    EXPECT_EQ(s.catalog.entities.size(), e.entities);
    std::array<std::size_t, 5> counts{};
    for (const auto& [prop, rules] : rules_by_property(s.rules)) counts[index_of(characteristic_of(prop))] += rules.size();
    EXPECT_EQ(counts, e.per_characteristic) << e.name;
    std::size_t rows = 0;
    for (const auto& [name, plan] : s.spec.entities) rows += plan.rows;
    EXPECT_LE(rows, 100'000u);
    EXPECT_TRUE(validate_ruleset(s.rules, s.catalog).empty());
  }
  EXPECT_EQ(build_scenario("travel-v1").rules, build_scenario("travel-v2").rules);
  EXPECT_THROW((void)build_scenario("travel-v3"), Error);
}

}  // namespace
}  // namespace dq
