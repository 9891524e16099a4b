#include <gtest/gtest.h>

#include <sstream>

#include "dq/cli.hpp"
#include "dq/reporting.hpp"
#include "support.hpp"

namespace dq {
namespace {

namespace fs = std::filesystem;
using test::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun dq(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  static inline test::TempDir* root = nullptr;

  static void SetUpTestSuite() {
    root = new test::TempDir("cli");
    for (const char* v : {"travel-v1", "travel-v2"}) {
      fs::path d = root->path / v;
      ASSERT_EQ(dq({"synth", "--scenario", v, "--out", d.string()}).code, kExitOk);
      CliRun r = dq({"evaluate", "--rules", (d / "rules.json").string(), "--schema", (d / "schema.json").string(),
                  "--data", d.string(), "--out", (root->path / (std::string(v) + "-report")).string()});
      ASSERT_EQ(r.code, kExitOk) << r.err;
    }
  }
  static void TearDownTestSuite() {
    delete root;
    root = nullptr;
  }

  static fs::path scenario(const std::string& v) { return root->path / v; }
  static fs::path report(const std::string& v) { return root->path / (v + "-report") / "report.json"; }
  static std::vector<std::string> inputs(const fs::path& d) {
    return {"--rules", (d / "rules.json").string(), "--schema", (d / "schema.json").string(), "--data", d.string()};
  }
  static CliRun improve(const fs::path& data, const fs::path& rep, const fs::path& out) {
    std::vector<std::string> args{"improve", "--report", rep.string(), "--out", out.string()};
    for (auto& a : inputs(data)) args.push_back(a);
    return dq(args);
  }
};

TEST_F(Cli, HelpAndUsage) {
  EXPECT_EQ(dq({"--help"}).code, kExitOk);
  EXPECT_EQ(dq({}).code, kExitUsage);
  EXPECT_EQ(dq({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(dq({"evaluate", "--rules", "x.json"}).code, kExitUsage);
}

TEST_F(Cli, Validate) {
  fs::path d = scenario("travel-v1");
  CliRun ok = dq({"validate", "--rules", (d / "rules.json").string(), "--schema", (d / "schema.json").string()});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_NE(ok.out.find("375 rules, 0 errors"), std::string::npos) << ok.out;

  test::TempDir t("validate");
  json rules = json::parse(read_file(d / "rules.json"));
  rules["rules"][0]["columns"] = {"no_such_column"};
  write_file(t.path / "bad.json", rules.dump());
  CliRun bad = dq({"validate", "--rules", (t.path / "bad.json").string(), "--schema", (d / "schema.json").string()});
  EXPECT_EQ(bad.code, kExitInvalid);
  EXPECT_NE(bad.err.find("no_such_column"), std::string::npos) << bad.err;

  write_file(t.path / "broken.json", "{\"name\": ");
  EXPECT_EQ(dq({"validate", "--rules", (t.path / "broken.json").string(), "--schema", (d / "schema.json").string()}).code,
            kExitInvalid);
  EXPECT_EQ(dq({"validate", "--rules", (t.path / "missing.json").string(), "--schema", (d / "schema.json").string()}).code,
            kExitUsage);
}

TEST_F(Cli, EvaluateWritesReport) {
  EvaluationReport r = parse_report(read_file(report("travel-v1")));
  EXPECT_EQ(r.verdict.status, Verdict::Status::not_eligible);
  EXPECT_EQ(r.scope.rule_count, 375u);
  EXPECT_EQ(r.characteristics.size(), 5u);
}

TEST_F(Cli, EvaluateFilters) {
  fs::path d = scenario("travel-v1");
  test::TempDir t("filter");
  CliRun r = dq({"evaluate", "--rules", (d / "rules.json").string(), "--schema", (d / "schema.json").string(), "--data",
              d.string(), "--out", t.path.string(), "--chars", "Accuracy", "--format", "text"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EvaluationReport rep = parse_report(read_file(t.path / "report.json"));
  ASSERT_EQ(rep.characteristics.size(), 1u);
  EXPECT_EQ(rep.characteristics[0].characteristic, CharacteristicId::accuracy);
  EXPECT_EQ(rep.scope.rule_count, 89u);
  EXPECT_TRUE(fs::exists(t.path / "report.txt"));
  EXPECT_NE(r.out.find("VERDICT:"), std::string::npos);

  EXPECT_EQ(dq({"evaluate", "--rules", (d / "rules.json").string(), "--schema", (d / "schema.json").string(), "--data",
                d.string(), "--out", t.path.string(), "--chars", "Beauty"})
                .code,
            kExitUsage);
}

TEST_F(Cli, EvaluateEmptySnapshotIsUsageError) {
  fs::path d = scenario("travel-v1");
  test::TempDir empty("empty");
  test::TempDir out("emptyout");
  CliRun r = dq({"evaluate", "--rules", (d / "rules.json").string(), "--schema", (d / "schema.json").string(), "--data",
              empty.path.string(), "--out", out.path.string()});
  EXPECT_EQ(r.code, kExitUsage) << r.err;
}

TEST_F(Cli, Certify) {
  CliRun v2 = dq({"certify", report("travel-v2").string()});
  EXPECT_EQ(v2.code, kExitOk);
  EXPECT_NE(v2.out.find("VERDICT: ELIGIBLE"), std::string::npos) << v2.out;
  CliRun v1 = dq({"certify", "--report", report("travel-v1").string()});
  EXPECT_EQ(v1.code, kExitNotEligible);
  EXPECT_NE(v1.out.find("NOT ELIGIBLE"), std::string::npos);

  test::TempDir t("certify");
  write_file(t.path / "corrupt.json", "{\"format\": 3");
  EXPECT_EQ(dq({"certify", (t.path / "corrupt.json").string()}).code, kExitUsage);
}

TEST_F(Cli, Improve) {
  test::TempDir t("improve");
  CliRun r = improve(scenario("travel-v1"), report("travel-v1"), t.path / "m");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  json index = json::parse(read_file(t.path / "m" / "index.json"));
  EXPECT_FALSE(index.empty());
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(t.path / "m")) files += e.path().extension() == ".json";
  EXPECT_GT(files, 1u);

  CliRun clean = improve(scenario("travel-v2"), report("travel-v2"), t.path / "c");
  ASSERT_EQ(clean.code, kExitOk) << clean.err;
  EXPECT_TRUE(fs::exists(t.path / "c" / "index.json"));
}

TEST_F(Cli, ImproveDetectsChangedData) {
  test::TempDir t("stale");
  fs::copy(scenario("travel-v1"), t.path / "data", fs::copy_options::recursive);
  fs::copy(root->path / "travel-v1-report", t.path / "rep", fs::copy_options::recursive);
  json rep = json::parse(read_file(t.path / "rep" / "report.json"));
  rep["metadata"]["snapshot_fingerprint"] = std::string(64, '0');
  write_file(t.path / "rep" / "report.json", rep.dump(2));
  CliRun r = improve(t.path / "data", t.path / "rep" / "report.json", t.path / "m");
  EXPECT_EQ(r.code, kExitMismatch) << r.err;
}

TEST_F(Cli, Compare) {
  test::TempDir t("compare");
  CliRun r = dq({"compare", report("travel-v1").string(), report("travel-v2").string(), "--out", t.path.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  json c = json::parse(read_file(t.path / "comparison.json"));
  EXPECT_TRUE(fs::exists(t.path / "comparison.txt"));
  EXPECT_NE(r.out.find("+4"), std::string::npos) << r.out;
  bool found = false;
  for (const auto& ch : c["characteristics"]) {
    if (ch["characteristic"] == "Accuracy") {
      EXPECT_EQ(ch["level_delta"], 4);
      found = true;
    }
  }
  EXPECT_TRUE(found) << c.dump(2);

  json other = json::parse(read_file(report("travel-v2")));
  other["metadata"]["ruleset"]["name"] = "other";
  write_file(t.path / "other.json", other.dump(2));
  EXPECT_EQ(dq({"compare", report("travel-v1").string(), (t.path / "other.json").string()}).code, kExitMismatch);
}

TEST_F(Cli, SynthIsReproducible) {
  test::TempDir t("synth");
  fs::path d = scenario("travel-v1");
  std::vector<std::string> common{"synth", "--spec", (d / "spec.json").string(), "--rules", (d / "rules.json").string(),
                                  "--schema", (d / "schema.json").string(), "--seed", "42", "--out"};
  auto a = common, b = common;
  a.push_back((t.path / "a").string());
  b.push_back((t.path / "b").string());
  ASSERT_EQ(dq(a).code, kExitOk);
  ASSERT_EQ(dq(b).code, kExitOk);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(t.path / "a")) {
    EXPECT_EQ(read_file(e.path()), read_file(t.path / "b" / e.path().filename())) << e.path();
    ++compared;
  }
  EXPECT_EQ(compared, 15u);
  EXPECT_NE(read_file(t.path / "a" / "expected_measures.json"), "");
  EXPECT_EQ(dq({"synth", "--scenario", "travel-v1"}).code, kExitUsage);
}

}  // namespace
}  // namespace dq
