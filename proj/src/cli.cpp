#include "dq/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <iostream>
#include <set>
#include <thread>

#include "dq/engine.hpp"
#include "dq/error.hpp"
#include "dq/reporting.hpp"
#include "dq/scoring.hpp"
#include "dq/synthkit.hpp"

namespace dq {

using nlohmann::json;

namespace {

// Thrown for bad flag values detected after parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Rules parse errors are validation failures rather than I/O problems.
class RulesInvalid : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string rules;
  std::string schema;
  std::string data;
  std::string out;
  std::string config;
  std::string report;
  std::string spec;
  std::string scenario;
  std::vector<std::string> chars;
  std::vector<std::string> props;
  std::vector<std::string> positional;
  std::string format = "json";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
};

struct Filters {
  std::set<CharacteristicId> chars;
  std::set<PropertyId> props;

  [[nodiscard]] bool empty() const { return chars.empty() && props.empty(); }
  [[nodiscard]] bool keeps(PropertyId p) const {
    return (chars.empty() || chars.count(characteristic_of(p))) && (props.empty() || props.count(p));
  }
  [[nodiscard]] json to_json() const {
    json c = json::array();
    json p = json::array();
    for (auto ch : chars) c.push_back(std::string(name(ch)));
    for (auto pr : props) p.push_back(std::string(acronym(pr)));
    return {{"characteristics", c}, {"properties", p}};
  }
  static Filters from_json(const json& j) {
    Filters f;
    if (!j.is_object()) return f;
    for (const auto& c : j.value("characteristics", json::array())) {
      if (auto ch = characteristic_from_name(c.get<std::string>())) f.chars.insert(*ch);
    }
    for (const auto& p : j.value("properties", json::array())) {
      if (auto pr = property_from_acronym(p.get<std::string>())) f.props.insert(*pr);
    }
    return f;
  }
};

Filters make_filters(const Options& o) {
  Filters f;
  for (const auto& c : o.chars) {
    auto ch = characteristic_from_name(c);
    if (!ch) throw UsageError("unknown characteristic '" + c + "'");
    f.chars.insert(*ch);
  }
  for (const auto& p : o.props) {
    auto pr = property_from_acronym(p);
    if (!pr) throw UsageError("unknown property '" + p + "'");
    f.props.insert(*pr);
  }
  return f;
}

RuleSet apply_filters(const RuleSet& rs, const Filters& f) {
  RuleSet out = rs;
  out.rules.clear();
  for (const auto& r : rs.rules) {
    if (f.keeps(r.property)) out.rules.push_back(r);
  }
  return out;
}

RuleSet load_rules(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_ruleset(text);
  } catch (const ParseError& e) {
    throw RulesInvalid(path + ": " + e.what());
  }
}

SchemaCatalog load_schema(const std::string& path) {
  std::string text = read_file(path);
  try {
    return load_catalog(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
}

// Validates rules against the catalog; prints diagnostics.
bool check_rules(const RuleSet& rs, const SchemaCatalog& catalog, std::ostream& err) {
  auto diags = validate_ruleset(rs, catalog);
  for (const auto& d : diags) err << d.to_string() << "\n";
  return !has_errors(diags);
}

struct Evaluation {
  RuleSet full;
  RuleSet rules;
  SchemaCatalog catalog;
  Repository repo;
  MeasureSet measures;
};

Evaluation run_evaluation(const Options& o, const Filters& filters, std::ostream& err) {
  require(o.rules, "--rules");
  require(o.schema, "--schema");
  require(o.data, "--data");
  Evaluation ev;
  ev.full = load_rules(o.rules);
  ev.catalog = load_schema(o.schema);
  if (!check_rules(ev.full, ev.catalog, err)) throw RulesInvalid("ruleset has validation errors");
  if (!std::filesystem::is_directory(o.data)) throw IoError("snapshot directory not found: " + o.data);
  ev.repo = load_snapshot(o.data, ev.catalog, o.jobs);
  ev.rules = apply_filters(ev.full, filters);
  ev.measures = eval_all(ev.rules, ev.repo, o.jobs);
  ev.measures.ruleset_fingerprint = ruleset_fingerprint(ev.full);
  return ev;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.rules, "--rules");
  require(o.schema, "--schema");
  RuleSet rs = load_rules(o.rules);
  SchemaCatalog catalog = load_schema(o.schema);
  auto diags = validate_ruleset(rs, catalog);
  for (const auto& d : diags) err << d.to_string() << "\n";
  std::size_t errors = static_cast<std::size_t>(
      std::count_if(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.level == Diagnostic::Level::error; }));
  out << rs.rules.size() << " rules, " << errors << " errors, " << diags.size() - errors << " warnings\n";
  return errors ? kExitInvalid : kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.out, "--out");
  Filters filters = make_filters(o);
  ScoringConfig config;
  if (!o.config.empty()) config = parse_scoring_config(read_file(o.config));
  Evaluation ev = run_evaluation(o, filters, err);
  ScoreResult scores = score_all(ev.measures, ev.rules, config);
  json cfg = {{"scoring", scoring_config_to_json(config)}, {"filters", filters.to_json()}};
  EvaluationReport report = build_report({&ev.rules, &ev.repo, &ev.measures, &scores, cfg});
  std::filesystem::path dir(o.out);
  write_file(dir / "report.json", serialize_report(report));
  if (o.format == "text") {
    std::string text = render_text(report);
    write_file(dir / "report.txt", text);
    out << text;
  } else {
    out << "report written to " << (dir / "report.json").string() << "\n";
  }
  return kExitOk;
}

EvaluationReport load_report(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_report(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

int cmd_certify(const Options& o, std::ostream& out, std::ostream&) {
  std::string path = o.report.empty() && !o.positional.empty() ? o.positional.front() : o.report;
  require(path, "--report");
  EvaluationReport report = load_report(path);
  std::string text = render_text(report);
  // The verdict is the last line of the text rendering.
  auto pos = text.rfind("VERDICT:");
  out << (pos == std::string::npos ? text : text.substr(pos));
  return report.verdict.status == Verdict::Status::eligible ? kExitOk : kExitNotEligible;
}

int cmd_improve(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.report, "--report");
  require(o.out, "--out");
  EvaluationReport report = load_report(o.report);
  Filters filters = Filters::from_json(report.metadata.config.value("filters", json::object()));
  Evaluation ev = run_evaluation(o, filters, err);
  auto manifests = build_improvement(report, ev.measures, ev.rules, ev.catalog);
  write_manifests(o.out, report, manifests);
  out << manifests.size() << " manifests written to " << o.out << "\n";
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream&) {
  if (o.positional.size() != 2) throw UsageError("compare needs two report paths");
  EvaluationReport first = load_report(o.positional[0]);
  EvaluationReport second = load_report(o.positional[1]);
  ComparisonReport c = compare(first, second);
  std::string text = render_text(c);
  if (!o.out.empty()) {
    std::filesystem::path dir(o.out);
    write_file(dir / "comparison.json", serialize_comparison(c));
    write_file(dir / "comparison.txt", text);
  }
  out << text;
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream&) {
  require(o.out, "--out");
  if (o.spec.empty() == o.scenario.empty()) throw UsageError("synth needs exactly one of --spec or --scenario");
  std::filesystem::path dir(o.out);
  SynthSpec spec;
  SchemaCatalog catalog;
  RuleSet rs;
  if (!o.scenario.empty()) {
    auto names = scenario_names();
    if (std::find(names.begin(), names.end(), o.scenario) == names.end()) {
      throw UsageError("unknown scenario '" + o.scenario + "'");
    }
    Scenario s = build_scenario(o.scenario);
    spec = std::move(s.spec);
    catalog = std::move(s.catalog);
    rs = std::move(s.rules);
  } else {
    require(o.rules, "--rules");
    require(o.schema, "--schema");
    spec = parse_synth_spec(read_file(o.spec));
    catalog = load_schema(o.schema);
    rs = load_rules(o.rules);
  }
  if (o.seed) spec.seed = *o.seed;
  SynthOutput result = generate(spec, catalog, rs);
  write_synth_output(dir, result);
  if (!o.scenario.empty()) {
    write_file(dir / "rules.json", serialize_ruleset(rs));
    write_file(dir / "schema.json", serialize_catalog(catalog));
    write_file(dir / "spec.json", synth_spec_to_json(spec).dump(2) + "\n");
  }
  std::size_t rows = 0;
  for (const auto& e : result.entities) rows += e.row_count;
  out << result.entities.size() << " entities, " << rows << " rows written to " << o.out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data quality evaluation against declarative business rules", "dq"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool data) {
    sub->add_option("--rules", o.rules, "Rules document (JSON)");
    sub->add_option("--schema", o.schema, "Schema catalog (JSON)");
    if (data) {
      sub->add_option("--data", o.data, "Snapshot directory of <entity>.csv files");
      sub->add_option("--jobs", o.jobs, "Parallel rule evaluations")->check(CLI::PositiveNumber);
    }
  };

  auto* validate = app.add_subcommand("validate", "Check a ruleset against a schema");
  common(validate, false);

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a snapshot and write report.json");
  common(evaluate, true);
  evaluate->add_option("--out", o.out, "Output directory");
  evaluate->add_option("--config", o.config, "Scoring configuration (JSON)");
  evaluate->add_option("--chars", o.chars, "Characteristics to evaluate")->delimiter(',');
  evaluate->add_option("--props", o.props, "Property acronyms to evaluate")->delimiter(',');
  evaluate->add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));

  auto* improve = app.add_subcommand("improve", "Write improvement manifests for a report");
  common(improve, true);
  improve->add_option("--report", o.report, "Evaluation report");
  improve->add_option("--out", o.out, "Manifest directory");

  auto* compare_cmd = app.add_subcommand("compare", "Compare two evaluation reports");
  compare_cmd->add_option("reports", o.positional, "First and second report")->expected(2);
  compare_cmd->add_option("--out", o.out, "Output directory");

  auto* certify = app.add_subcommand("certify", "Check certification eligibility of a report");
  certify->add_option("report_path", o.positional, "Evaluation report")->expected(0, 1);
  certify->add_option("--report", o.report, "Evaluation report");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic snapshot with known measures");
  common(synth, false);
  synth->add_option("--spec", o.spec, "Synthesis spec (JSON)");
  synth->add_option("--scenario", o.scenario, "Built-in scenario name");
  synth->add_option("--seed", o.seed, "Override the synthesis seed");
  synth->add_option("--out", o.out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out, err);
    if (evaluate->parsed()) return cmd_evaluate(o, out, err);
    if (improve->parsed()) return cmd_improve(o, out, err);
    if (compare_cmd->parsed()) return cmd_compare(o, out, err);
    if (certify->parsed()) return cmd_certify(o, out, err);
    if (synth->parsed()) return cmd_synth(o, out, err);
  } catch (const RulesInvalid& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const EvalError& e) {
    err << "evaluation error: " << e.what() << "\n";
    return kExitEvalError;
  } catch (const FingerprintMismatch& e) {
    err << "mismatch: " << e.what() << "\n";
    return kExitMismatch;
  } catch (const ScopeMismatch& e) {
    err << "mismatch: " << e.what() << "\n";
    return kExitMismatch;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace dq
