// Acceptance checks. Usage: dq_acceptance ac1|...|ac8 (no argument runs all).
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "dq/cli.hpp"
#include "dq/reporting.hpp"
#include "dq/scoring.hpp"
#include "synth_cases.hpp"

namespace fs = std::filesystem;
using namespace dq;
using test::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  int code = run_cli(args, o, e);
  if (out) *out = o.str();
  if (code != kExitOk && code != kExitNotEligible) std::cerr << e.str();
  return code;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string levels_text(const EvaluationReport& r) {
  std::string s;
  for (const auto& c : r.characteristics) {
    s += std::string(name(c.characteristic)) + "=" + (c.level ? std::to_string(*c.level) : "-") + " ";
  }
  return s;
}

std::optional<int> level_of(const EvaluationReport& r, CharacteristicId c) {
  const auto* res = r.characteristic(c);
  return res ? res->level : std::nullopt;
}

Outcome ac1() {
  Outcome o;
  std::vector<int> levels{4, 4, 3};
  Profile p = make_profile(levels);
  o.require(p == Profile{0, 0, 1, 2, 0}, "profile differs from <0,0,1,2,0>");
  int level = profile_to_level(p, ProfilingTable::example());
  o.require(level == 3, "characteristic level " + std::to_string(level) + " != 3");
  o.require(ProfilingTable::scaled(3) == ProfilingTable::example(), "scaled(3) differs from the example table");
  if (o.pass) o.detail = "levels (4,4,3) -> profile <0,0,1,2,0> -> level 3";
  return o;
}

Outcome ac2() {
  Outcome o;
  const std::vector<std::pair<double, int>> probes{{0, 1},     {19.99, 1}, {20, 2},    {39.99, 2}, {40, 3},
                                                   {69.99, 3}, {70, 4},    {84.99, 4}, {85, 5},    {100, 5}};
  for (auto [v, want] : probes) {
    int got = value_to_level(v);
    o.require(got == want, std::to_string(v) + " -> " + std::to_string(got));
  }
  if (o.pass) o.detail = "10 probe values map to levels 1,1,2,2,3,3,4,4,5,5";
  return o;
}

Outcome ac3() {
  Outcome o;
  std::size_t cases = 0;
  for (KindTag kind : test::kAllKinds) {
    std::map<PropertyId, std::vector<RuleMeasure>> by_property;
    std::map<PropertyId, std::pair<std::uint64_t, std::uint64_t>> oracle;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      test::KindCase c = test::random_kind_case(kind, 7'000'000 + seed * 31 + static_cast<std::uint64_t>(kind));
      SynthOutput out = generate(c.spec, c.catalog, c.rules);
      MeasureSet ms = eval_all(c.rules, make_repository(c.catalog, out.entities), 1);
      auto d = expected_vs_actual(out.expected, ms);
      if (!d.empty()) o.require(false, std::string(kind_name(kind)) + " seed " + std::to_string(seed) + ": " + d[0].to_string());
      const RuleMeasure& m = ms.measures.at("R");
      const ExpectedMeasure& e = out.expected.at("R");
      by_property[m.property].push_back(m);
      oracle[m.property].first += e.a;
      oracle[m.property].second += e.b;
      ++cases;
    }
    for (const auto& [prop, measures] : by_property) {
      std::vector<const RuleMeasure*> ptrs;
      for (const auto& m : measures) ptrs.push_back(&m);
      PropertyValue pv = property_value(ptrs, Aggregation::micro);
      auto [a, b] = oracle[prop];
      if (b == 0) {
        o.require(!pv.value, std::string(kind_name(kind)) + ": value present with zero B");
        continue;
      }
      double want = 100.0 * static_cast<double>(a) / static_cast<double>(b);
      o.require(pv.value && std::fabs(*pv.value - want) <= 1e-9,
                std::string(kind_name(kind)) + " micro value off for " + std::string(acronym(prop)));
    }
  }
  if (o.pass) o.detail = std::to_string(cases) + " fixtures, all exact";
  return o;
}

// Sets a compliant value in the failing cell of one of the rules below.
void repair(Entity& e, const Rule& rule, std::size_t ordinal) {
  const std::string& column = rule.columns.front();
  Value fixed;
  switch (rule.tag()) {
    case KindTag::syntax: fixed = Value("AB123"); break;
    case KindTag::range: fixed = Value(50); break;
    case KindTag::domain: fixed = Value("gold"); break;
    case KindTag::not_null: fixed = Value("present"); break;
    case KindTag::format_class: fixed = Value("12345"); break;
    default: throw Error("no repair for this kind");
  }
  e.columns[e.column_index(column)][ordinal] = fixed;
}

Outcome ac4() {
  Outcome o;
  SchemaCatalog catalog = test::catalog_from(json::array(
      {{{"name", "e"},
        {"columns", {{{"name", "id"}, {"type", "integer"}, {"nullable", false}},
                     {{"name", "code"}, {"type", "text"}},
                     {{"name", "code2"}, {"type", "text"}},
                     {{"name", "n"}, {"type", "integer"}},
                     {{"name", "n2"}, {"type", "integer"}},
                     {{"name", "tier"}, {"type", "text"}},
                     {{"name", "note"}, {"type", "text"}},
                     {{"name", "post"}, {"type", "text"}}}},
        {"key", {"id"}}}}));
  RuleSet rs = test::rules_from(
      json::array({
          {{"id", "A1"}, {"entity", "e"}, {"columns", {"code"}}, {"property", "EXAC_SINT"}, {"kind", "syntax"}, {"params", {{"pattern", "[A-Z]{2}[0-9]{3}"}}}},
          {{"id", "A2"}, {"entity", "e"}, {"columns", {"code2"}}, {"property", "EXAC_SINT"}, {"kind", "syntax"}, {"params", {{"pattern", "[A-Z]{2}[0-9]{3}"}}}},
          {{"id", "A3"}, {"entity", "e"}, {"columns", {"n"}}, {"property", "RAN_EXAC"}, {"kind", "range"}, {"params", {{"min", 0}, {"max", 100}}}},
          {{"id", "A4"}, {"entity", "e"}, {"columns", {"n2"}}, {"property", "RAN_EXAC"}, {"kind", "range"}, {"params", {{"min", 10}, {"max", 90}}}},
          {{"id", "A5"}, {"entity", "e"}, {"columns", {"tier"}}, {"property", "EXAC_SEMAN"}, {"kind", "domain"}, {"params", {{"values", {"gold", "silver"}}}}},
          {{"id", "C1"}, {"entity", "e"}, {"columns", {"note"}}, {"property", "COMP_REG"}, {"kind", "not_null"}},
          {{"id", "K1"}, {"entity", "e"}, {"columns", {"post"}}, {"property", "CONS_FORM"}, {"kind", "format_class"}, {"params", {{"class", "zip"}}}},
      }),
      json{{"zip", "[0-9]{5}"}});

  std::size_t steps = 0;
  for (std::uint64_t fixture = 0; fixture < 5; ++fixture) {
    std::mt19937_64 rng(900 + fixture);
    json plans = json::array();
    for (const auto& r : rs.rules) plans.push_back({{"rule_id", r.id}, {"rate", static_cast<double>(rng() % 90) / 100.0}});
    SynthSpec spec = parse_synth_spec(json{{"seed", 900 + fixture}, {"entities", {{"e", {{"rows", 60}}}}}, {"plans", plans}}.dump());
    std::vector<Entity> entities = generate(spec, catalog, rs).entities;

    ScoreResult before = score_all(eval_all(rs, make_repository(catalog, entities), 1), rs);
    for (int i = 0; i < 20; ++i, ++steps) {
      MeasureSet ms = eval_all(rs, make_repository(catalog, entities), 1);
      std::vector<const RuleMeasure*> failing;
      for (const auto& [id, m] : ms.measures)
        if (!m.failing.empty()) failing.push_back(&m);
      if (failing.empty()) break;
      const RuleMeasure& m = *failing[rng() % failing.size()];
      const Rule& rule = *rs.find(m.rule_id);
      repair(entities[0], rule, m.failing[rng() % m.failing.size()].ordinal);

      ScoreResult after = score_all(eval_all(rs, make_repository(catalog, entities), 1), rs);
      for (std::size_t p = 0; p < before.properties.size(); ++p) {
        const auto& b = before.properties[p];
        const auto& a = after.properties[p];
        o.require(a.value.value_or(0) >= b.value.value_or(0), "property value dropped at step " + std::to_string(steps));
        o.require(a.level.value_or(0) >= b.level.value_or(0), "property level dropped at step " + std::to_string(steps));
      }
      for (std::size_t c = 0; c < before.characteristics.size(); ++c) {
        o.require(after.characteristics[c].level.value_or(0) >= before.characteristics[c].level.value_or(0),
                  "characteristic level dropped at step " + std::to_string(steps));
      }
      before = std::move(after);
    }
  }
  o.require(steps == 100, "only " + std::to_string(steps) + " repair steps ran");
  if (o.pass) o.detail = std::to_string(steps) + " repair steps, no decrease";
  return o;
}

struct ScenarioRun {
  EvaluationReport report;
  int certify_exit = -1;
};

ScenarioRun run_scenario(const std::string& name, const fs::path& root) {
  fs::path data = root / name;
  fs::path out = root / (name + "-report");
  if (cli({"synth", "--scenario", name, "--out", data.string()}) != kExitOk) throw Error("synth failed for " + name);
  if (cli({"evaluate", "--rules", (data / "rules.json").string(), "--schema", (data / "schema.json").string(),
           "--data", data.string(), "--out", out.string()}) != kExitOk) {
    throw Error("evaluate failed for " + name);
  }
  ScenarioRun r;
  r.report = parse_report(read_file(out / "report.json"));
  r.certify_exit = cli({"certify", (out / "report.json").string()});
  return r;
}

using Expectation = std::map<CharacteristicId, int>;

Outcome scenario_pair(const std::string& family, const Expectation& v1, const Expectation& v2) {
  Outcome o;
  test::TempDir root("acceptance_" + family);
  for (const auto& [version, want, exit] :
       {std::tuple{family + "-v1", v1, kExitNotEligible}, std::tuple{family + "-v2", v2, kExitOk}}) {
    ScenarioRun run = run_scenario(version, root.path);
    for (const auto& [c, level] : want) {
      auto got = level_of(run.report, c);
      o.require(got == level, version + " " + std::string(name(c)) + " = " +
                                  (got ? std::to_string(*got) : "-") + ", want " + std::to_string(level));
    }
    o.require(run.certify_exit == exit, version + " certify exit " + std::to_string(run.certify_exit));
    o.detail += (o.detail.empty() ? "" : " | ") + version + ": " + levels_text(run.report);
  }
  return o;
}

Outcome ac5() {
  using C = CharacteristicId;
  return scenario_pair("travel", {{C::accuracy, 1}, {C::completeness, 2}},
                       {{C::accuracy, 5}, {C::completeness, 4}, {C::consistency, 3}, {C::currentness, 5}});
}

Outcome ac6() {
  using C = CharacteristicId;
  return scenario_pair("registry", {{C::accuracy, 1}, {C::consistency, 1}, {C::completeness, 5}, {C::credibility, 5}},
                       {{C::accuracy, 5}, {C::consistency, 3}, {C::currentness, 5}, {C::completeness, 5},
                        {C::credibility, 5}});
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  for (const auto& e : fs::directory_iterator(a)) {
    fs::path other = b / e.path().filename();
    if (!fs::exists(other) || read_file(e.path()) != read_file(other)) return false;
    ++files;
  }
  std::size_t count_b = std::distance(fs::directory_iterator(b), fs::directory_iterator{});
  return count_b == files;
}

Outcome ac7() {
  Outcome o;
  test::TempDir root("acceptance_det");
  for (const char* d : {"s1", "s2"}) {
    o.require(cli({"synth", "--scenario", "school-v1", "--seed", "42", "--out", (root.path / d).string()}) == kExitOk,
              "synth failed");
  }
  std::size_t files = 0;
  o.require(same_tree(root.path / "s1", root.path / "s2", files), "synth snapshots differ");
  fs::path data = root.path / "s1";
  for (const char* d : {"r1", "r2"}) {
    o.require(cli({"evaluate", "--rules", (data / "rules.json").string(), "--schema", (data / "schema.json").string(),
                   "--data", data.string(), "--out", (root.path / d).string(), "--format", "text"}) == kExitOk,
              "evaluate failed");
  }
  o.require(read_file(root.path / "r1" / "report.json") == read_file(root.path / "r2" / "report.json"),
            "report.json differs");
  o.require(read_file(root.path / "r1" / "report.txt") == read_file(root.path / "r2" / "report.txt"),
            "report.txt differs");
  if (o.pass) o.detail = std::to_string(files) + " snapshot files and both reports byte-identical";
  return o;
}

Outcome ac8() {
  Outcome o;
  test::TempDir root("acceptance_perf");
  json columns = json::array({{{"name", "id"}, {"type", "integer"}, {"nullable", false}}});
  json rules = json::array();
  json generators = json::object();
  const std::vector<std::string> kinds{"syntax", "range", "domain", "syntax", "range",
                                       "domain", "syntax", "range",  "domain", "syntax"};
  json plans = json::array();
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    std::string col = "c" + std::to_string(i);
    std::string id = "P" + std::to_string(i);
    json rule = {{"id", id}, {"entity", "big"}, {"columns", {col}}, {"kind", kinds[i]}};
    if (kinds[i] == "syntax") {
      columns.push_back({{"name", col}, {"type", "text"}});
      rule.update({{"property", "EXAC_SINT"}, {"params", {{"pattern", "[A-Z]{3}-[0-9]{4}"}}}});
    } else if (kinds[i] == "range") {
      columns.push_back({{"name", col}, {"type", "integer"}});
      rule.update({{"property", "RAN_EXAC"}, {"params", {{"min", 0}, {"max", 500}}}});
    } else {
      columns.push_back({{"name", col}, {"type", "text"}});
      rule.update({{"property", "EXAC_SEMAN"}, {"params", {{"values", {"alpha", "beta", "gamma", "delta"}}}}});
    }
    rules.push_back(rule);
    plans.push_back({{"rule_id", id}, {"rate", 0.05 * static_cast<double>(i % 4)}});
  }
  json schema = {{"entities", {{{"name", "big"}, {"columns", columns}, {"key", {"id"}}}}}};
  json ruleset = {{"name", "perf"}, {"version", "1"}, {"reference_time", "2024-01-01T00:00:00Z"}, {"rules", rules}};
  json spec = {{"seed", 8}, {"entities", {{"big", {{"rows", 1'000'000}}}}}, {"plans", plans}};
  write_file(root.path / "schema.json", schema.dump(2));
  write_file(root.path / "rules.json", ruleset.dump(2));
  write_file(root.path / "spec.json", spec.dump(2));
  fs::path data = root.path / "data";
  if (cli({"synth", "--spec", (root.path / "spec.json").string(), "--rules", (root.path / "rules.json").string(),
           "--schema", (root.path / "schema.json").string(), "--out", data.string()}) != kExitOk) {
    o.require(false, "synth failed");
    return o;
  }

  auto evaluate = [&](const std::string& jobs, const std::string& dir) {
    auto t0 = std::chrono::steady_clock::now();
    int code = cli({"evaluate", "--rules", (root.path / "rules.json").string(), "--schema",
                    (root.path / "schema.json").string(), "--data", data.string(), "--out", (root.path / dir).string(),
                    "--jobs", jobs});
    o.require(code == kExitOk, "evaluate --jobs " + jobs + " exit " + std::to_string(code));
    return seconds_since(t0);
  };
  double serial = evaluate("1", "j1");
  double parallel = evaluate("4", "j4");
  double speedup = serial / parallel;
  std::ostringstream d;
  d.precision(3);
  d << "1M rows x 10 rules: jobs=1 " << serial << " s, jobs=4 " << parallel << " s, speedup " << speedup << "x, "
    << std::thread::hardware_concurrency() << " hardware threads";
  o.require(serial < 120.0, "single-threaded run exceeded 120 s");
  o.require(read_file(root.path / "j1" / "report.json") == read_file(root.path / "j4" / "report.json"),
            "jobs=4 output differs");
  o.require(speedup >= 1.5, "speedup below 1.5x");
  o.detail = d.str() + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"ac1", 1, ac1},   {"ac2", 1, ac2},   {"ac3", 60, ac3},  {"ac4", 60, ac4},
      {"ac5", 120, ac5}, {"ac6", 120, ac6}, {"ac7", 60, ac7},  {"ac8", 300, ac8},
  };
  std::vector<const Criterion*> chosen;
  for (const auto& c : all)
    if (argc < 2 || c.name == argv[1]) chosen.push_back(&c);
  if (chosen.empty()) {
    std::cerr << "unknown criterion " << argv[1] << "\n";
    return 2;
  }
  int failures = 0;
  for (const Criterion* c : chosen) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c->run();
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    double elapsed = seconds_since(t0);
    if (c->name != "ac8") out.require(elapsed < c->limit_seconds, "exceeded time limit");
    std::cout << (out.pass ? "PASS " : "FAIL ") << c->name << " (" << std::fixed << std::setprecision(2) << elapsed
              << " s): " << out.detail << std::endl;
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
