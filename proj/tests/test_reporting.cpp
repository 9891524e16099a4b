#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "dq/error.hpp"
#include "dq/reporting.hpp"
#include "dq/scoring.hpp"
#include "dq/synthkit.hpp"
#include "support.hpp"

namespace dq {
namespace {

using test::json;

const std::filesystem::path kGolden = DQ_GOLDEN_DIR;

// Compares against tests/golden/<name>; DQ_UPDATE_GOLDEN=1 rewrites it.
void expect_golden(const std::string& name, const std::string& actual) {
  auto path = kGolden / name;
  if (std::getenv("DQ_UPDATE_GOLDEN")) {
    write_file(path, actual);
    return;
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << "missing golden file " << path;
  EXPECT_EQ(read_file(path), actual) << "golden mismatch: " << name;
}

json fixture_rules() {
  return json::array({
      {{"id", "P-SYN"}, {"entity", "person"}, {"columns", {"id"}}, {"property", "EXAC_SINT"}, {"kind", "syntax"},
       {"params", {{"pattern", "^[0-9]{8}[A-Z]$"}}}},
      {{"id", "W-DOM"}, {"entity", "warning"}, {"columns", {"type"}}, {"property", "EXAC_SEMAN"}, {"kind", "domain"},
       {"params", {{"values", {"IT GENERAL", "SUPERCOMPUTATION", "HR"}}}}},
      {{"id", "W-RNG"}, {"entity", "warning"}, {"columns", {"wid"}}, {"property", "RAN_EXAC"}, {"kind", "range"},
       {"params", {{"min", 1}, {"max", 4}}}},
      {{"id", "P-NN"}, {"entity", "person"}, {"columns", {"ipaddress"}}, {"property", "COMP_REG"}, {"kind", "not_null"}},
      {{"id", "P-CNT"}, {"entity", "person"}, {"property", "COMP_FICH"}, {"kind", "min_count"}, {"params", {{"threshold", 3}}}},
      {{"id", "P-IP"}, {"entity", "person"}, {"columns", {"ipaddress"}}, {"property", "CONS_FORM"}, {"kind", "syntax"},
       {"params", {{"pattern", "10\\.0\\.0\\.9"}}}},
      {{"id", "W-UNQ"}, {"entity", "warning"}, {"columns", {"type"}}, {"property", "RIES_INCO"}, {"kind", "unique"}},
  });
}

struct Pipeline {
  RuleSet rs;
  SchemaCatalog catalog;
  Repository repo;
  MeasureSet ms;
  ScoreResult scores;
  EvaluationReport report;
};

Pipeline run(const std::map<std::string, std::string>& csv, json rules = fixture_rules()) {
  Pipeline p;
  p.rs = test::rules_from(rules);
  p.catalog = test::person_catalog();
  p.repo = test::repo_from(p.catalog, csv);
  p.ms = eval_all(p.rs, p.repo, 2);
  p.scores = score_all(p.ms, p.rs);
  json cfg = {{"scoring", scoring_config_to_json({})}};
  p.report = build_report({&p.rs, &p.repo, &p.ms, &p.scores, cfg});
  return p;
}

std::map<std::string, std::string> repaired_csv() {
  return {{"person", "id,ipaddress\n12345678A,10.0.0.9\n87654321Z,10.0.0.9\n12340000C,10.0.0.9\n11111111B,10.0.0.9\n"},
          {"warning", "wid,type\n1,HR\n2,IT GENERAL\n3,SUPERCOMPUTATION\n"}};
}

TEST(Report, GoldenNotEligible) {
  Pipeline p = run(test::person_csv());
  EXPECT_EQ(p.report.verdict.status, Verdict::Status::not_eligible);
  expect_golden("report_not_eligible.json", serialize_report(p.report));
  expect_golden("report_not_eligible.txt", render_text(p.report));
}

TEST(Report, EligibleFinalLine) {
  Pipeline p = run(repaired_csv(), json::array({fixture_rules()[0], fixture_rules()[3]}));
  EXPECT_EQ(p.report.verdict.status, Verdict::Status::eligible);
  std::string text = render_text(p.report);
  EXPECT_TRUE(text.size() > 40 && text.substr(text.size() - 37) == "VERDICT: ELIGIBLE (min level 3 rule)\n") << text;
  for (const auto& c : p.report.characteristics) EXPECT_EQ(c.level, 5);
}

TEST(Report, RoundTripAndCanonicalBytes) {
  Pipeline p = run(test::person_csv());
  std::string bytes = serialize_report(p.report);
  EXPECT_EQ(parse_report(bytes), p.report);
  EXPECT_EQ(serialize_report(parse_report(bytes)), bytes);
  EXPECT_EQ(serialize_report(run(test::person_csv()).report), bytes);
  EXPECT_THROW((void)parse_report("{\"format\": 3}"), ParseError);
  EXPECT_THROW((void)parse_report("not json"), ParseError);
}

TEST(Report, RatioTextAndRounding) {
  EXPECT_EQ(ratio_text(3, 4), "0.7500");
  EXPECT_EQ(ratio_text(2, 3), "0.6667");
  EXPECT_EQ(ratio_text(1, 8), "0.1250");
  EXPECT_EQ(ratio_text(1, 20000), "0.0001");  // 0.00005 rounds up
  EXPECT_DOUBLE_EQ(round4(0.03125), 0.0313);
  EXPECT_DOUBLE_EQ(round4(-0.03125), -0.0313);
  EXPECT_FALSE(std::signbit(round4(-0.00001)));
}

TEST(Manifest, SingleFailingSyntaxRow) {
  json rules = json::array({fixture_rules()[0]});
  Pipeline p = run(test::person_csv(), rules);
  auto manifests = build_improvement(p.report, p.ms, p.rs, p.catalog);
  ASSERT_EQ(manifests.size(), 1u);
  const auto& m = manifests[0];
  EXPECT_EQ(m.entity, "person");
  EXPECT_EQ(m.property, PropertyId::syntactic_accuracy);
  EXPECT_EQ(m.file_name(), "person.EXAC_SINT.manifest.json");
  ASSERT_EQ(m.rules.size(), 1u);
  ASSERT_EQ(m.rules[0].refs.size(), 1u);
  EXPECT_EQ(m.rules[0].refs[0].ordinal, 2u);
  EXPECT_EQ(m.rules[0].refs[0].key, std::vector<Value>{Value("1234")});
  expect_golden("manifest_person_EXAC_SINT.json", manifest_to_json(m).dump(2) + "\n");
}

TEST(Manifest, ZeroFailuresAndTwoEntities) {
  Pipeline clean = run(repaired_csv(), json::array({fixture_rules()[0]}));
  EXPECT_TRUE(build_improvement(clean.report, clean.ms, clean.rs, clean.catalog).empty());

  json rules = json::array({fixture_rules()[0], fixture_rules()[0]});
  rules[1] = {{"id", "W-SYN"}, {"entity", "warning"}, {"columns", {"type"}}, {"property", "EXAC_SINT"},
              {"kind", "syntax"}, {"params", {{"pattern", "[A-Z ]+"}}}};
  Pipeline two = run(test::person_csv(), rules);
  auto manifests = build_improvement(two.report, two.ms, two.rs, two.catalog);
  ASSERT_EQ(manifests.size(), 2u);
  EXPECT_EQ(manifests[0].entity, "person");
  EXPECT_EQ(manifests[1].entity, "warning");

  test::TempDir dir("manifests");
  write_manifests(dir.path, two.report, manifests);
  EXPECT_TRUE(std::filesystem::exists(dir.path / "index.json"));
  EXPECT_TRUE(std::filesystem::exists(dir.path / "warning.EXAC_SINT.manifest.json"));
}

TEST(Manifest, FingerprintMismatch) {
  Pipeline a = run(test::person_csv());
  Pipeline b = run(repaired_csv());
  EXPECT_THROW((void)build_improvement(a.report, b.ms, b.rs, b.catalog), FingerprintMismatch);
}

// Σ refs over manifests = Σ (B − A) of row-scoped rules, and each selector
// picks exactly the failing rows.
TEST(ManifestProperty, CompletenessAndSelectors) {
  Scenario s = build_scenario("school-v1");
  for (int seed = 0; seed < 5; ++seed) {
    SynthSpec spec = s.spec;
    spec.seed = static_cast<std::uint64_t>(seed);
    for (auto& [name, plan] : spec.entities) plan.rows = 40;
    SynthOutput out = generate(spec, s.catalog, s.rules);
    Repository repo = make_repository(s.catalog, out.entities);
    MeasureSet ms = eval_all(s.rules, repo, 1);
    ScoreResult scores = score_all(ms, s.rules);
    EvaluationReport report = build_report({&s.rules, &repo, &ms, &scores, json::object()});
    auto manifests = build_improvement(report, ms, s.rules, s.catalog);
    std::uint64_t refs = 0;
    for (const auto& m : manifests) {
      for (const auto& r : m.rules) refs += r.refs.size();
    }
    std::uint64_t failing = 0;
    for (const auto& [id, m] : ms.measures) {
      if (!is_entity_level(m.kind)) failing += m.b - m.a;
    }
    EXPECT_EQ(refs, failing) << "seed " << seed;

    EvalContext ctx{s.rules.reference_time};
    for (const auto& m : manifests) {
      const Entity* e = repo.find(m.entity);
      ASSERT_NE(e, nullptr);
      for (const auto& r : m.rules) {
        if (!r.selector) continue;
        BoundExpr sel(parse_expr(*r.selector),
                      [&](std::string_view c) { return e->schema.column_index(c); });
        std::vector<std::size_t> picked;
        for (std::size_t row = 0; row < e->row_count; ++row) {
          if (sel.holds(e->row(row), ctx)) picked.push_back(row);
        }
        std::vector<std::size_t> expected;
        for (const auto& ref : r.refs) expected.push_back(ref.ordinal);
        expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
        EXPECT_EQ(picked, expected) << r.rule_id << " selector " << *r.selector;
      }
    }
  }
}

TEST(Compare, GoldenAndDeltas) {
  Pipeline before = run(test::person_csv());
  Pipeline after = run(repaired_csv());
  ComparisonReport c = compare(before.report, after.report);
  EXPECT_FALSE(c.regression);
  expect_golden("comparison.txt", render_text(c));
  expect_golden("comparison.json", serialize_comparison(c));

  ComparisonReport self = compare(before.report, before.report);
  for (const auto& d : self.properties) EXPECT_EQ(d.level_delta, 0);
  for (const auto& d : self.characteristics) EXPECT_EQ(d.level_delta, 0);
  EXPECT_FALSE(self.regression);
}

TEST(Compare, AddedRemovedAndScope) {
  Pipeline full = run(test::person_csv());
  json fewer = fixture_rules();
  fewer.erase(fewer.begin() + 2);  // drops RAN_EXAC
  Pipeline partial = run(test::person_csv(), fewer);
  ComparisonReport c = compare(full.report, partial.report);
  EXPECT_EQ(c.removed, std::vector<PropertyId>{PropertyId::accuracy_range});
  for (const auto& d : c.properties) EXPECT_NE(d.property, PropertyId::accuracy_range);

  EvaluationReport renamed = partial.report;
  renamed.metadata.ruleset_name = "other";
  EXPECT_THROW((void)compare(full.report, renamed), ScopeMismatch);

  Pipeline only_acc = run(test::person_csv(), json::array({fixture_rules()[0]}));
  Pipeline only_comp = run(test::person_csv(), json::array({fixture_rules()[3]}));
  EXPECT_THROW((void)compare(only_acc.report, only_comp.report), ScopeMismatch);
}

TEST(CompareProperty, Antisymmetry) {
  Scenario s = build_scenario("travel-v1");
  std::mt19937_64 rng(4);
  std::vector<EvaluationReport> reports;
  for (int i = 0; i < 4; ++i) {
    SynthSpec spec = s.spec;
    spec.seed = rng();
    for (auto& [name, plan] : spec.entities) plan.rows = 30;
    for (auto& plan : spec.plans) plan.rate = static_cast<double>(rng() % 101) / 100.0;
    SynthOutput out = generate(spec, s.catalog, s.rules);
    Repository repo = make_repository(s.catalog, out.entities);
    MeasureSet ms = eval_all(s.rules, repo, 1);
    ScoreResult scores = score_all(ms, s.rules);
    reports.push_back(build_report({&s.rules, &repo, &ms, &scores, json::object()}));
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = 0; j < reports.size(); ++j) {
      ComparisonReport ab = compare(reports[i], reports[j]);
      ComparisonReport ba = compare(reports[j], reports[i]);
      ASSERT_EQ(ab.properties.size(), ba.properties.size());
      for (std::size_t k = 0; k < ab.properties.size(); ++k) {
        ASSERT_TRUE(ab.properties[k].level_delta && ba.properties[k].level_delta);
        EXPECT_EQ(*ab.properties[k].level_delta, -*ba.properties[k].level_delta);
        ASSERT_TRUE(ab.properties[k].value_delta && ba.properties[k].value_delta);
        EXPECT_DOUBLE_EQ(*ab.properties[k].value_delta, -*ba.properties[k].value_delta);
      }
      for (std::size_t k = 0; k < ab.characteristics.size(); ++k) {
        EXPECT_EQ(*ab.characteristics[k].level_delta, -*ba.characteristics[k].level_delta);
      }
    }
  }
}

}  // namespace
}  // namespace dq
