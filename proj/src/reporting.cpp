#include "dq/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "dq/error.hpp"
#include "json_locate.hpp"

namespace dq {

using nlohmann::json;

double round4(double v) {
  double r = std::round(v * 10000.0) / 10000.0;
  return r == 0 ? 0.0 : r;
}

std::string ratio_text(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 scaled = (static_cast<unsigned __int128>(a) * 20000 + b) / (2 * static_cast<unsigned __int128>(b));
  auto whole = static_cast<std::uint64_t>(scaled / 10000);
  auto frac = static_cast<unsigned>(scaled % 10000);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%llu.%04u", static_cast<unsigned long long>(whole), frac);
  return buf;
}

const ReportProperty* EvaluationReport::property(PropertyId p) const {
  for (const auto& x : properties) {
    if (x.property == p) return &x;
  }
  return nullptr;
}

const CharacteristicResult* EvaluationReport::characteristic(CharacteristicId c) const {
  for (const auto& x : characteristics) {
    if (x.characteristic == c) return &x;
  }
  return nullptr;
}

bool operator==(const CharacteristicResult& a, const CharacteristicResult& b) {
  return a.characteristic == b.characteristic && a.profile == b.profile && a.level == b.level &&
         a.strengths == b.strengths && a.weaknesses == b.weaknesses;
}

bool operator==(const Verdict& a, const Verdict& b) {
  return a.status == b.status && a.reasons == b.reasons;
}

bool operator==(const EvaluationReport& a, const EvaluationReport& b) {
  return a.metadata == b.metadata && a.scope == b.scope && a.measures == b.measures &&
         a.properties == b.properties && a.characteristics == b.characteristics &&
         a.verdict == b.verdict;
}

EvaluationReport build_report(const ReportInputs& in) {
  const RuleSet& rs = *in.ruleset;
  EvaluationReport r;
  r.metadata.ruleset_name = rs.name;
  r.metadata.ruleset_version = rs.version;
  r.metadata.ruleset_fingerprint = in.measures->ruleset_fingerprint;
  r.metadata.snapshot_fingerprint = in.measures->snapshot_fingerprint;
  r.metadata.reference_time = rs.reference_time;
  r.metadata.tool_version = in.tool_version;
  r.metadata.config = in.config;

  for (const auto& e : in.repository->entities) r.scope.rows[e.name()] = e.row_count;
  for (const auto& rule : rs.rules) ++r.scope.rules_per_characteristic[characteristic_of(rule.property)];
  r.scope.rule_count = rs.rules.size();

  for (const auto& [id, m] : in.measures->measures) {
    r.measures.push_back({m.rule_id, m.entity, m.property, m.kind, m.a, m.b, m.failing_count});
  }
  for (const auto& p : in.scores->properties) {
    r.properties.push_back({p.property, p.value ? std::optional(round4(*p.value)) : std::nullopt,
                            p.level, p.sum_a, p.sum_b, p.rule_count});
  }
  r.characteristics = in.scores->characteristics;
  r.verdict = in.scores->verdict;
  return r;
}

namespace {

json opt(const std::optional<int>& v) { return v ? json(*v) : json(); }
json opt(const std::optional<double>& v) { return v ? json(*v) : json(); }

json acronyms(const std::vector<PropertyId>& ps) {
  json out = json::array();
  for (auto p : ps) out.push_back(std::string(acronym(p)));
  return out;
}

std::optional<int> get_opt_int(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<int>();
}

std::optional<double> get_opt_double(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

PropertyId property_at(const json& j) {
  auto s = j.get<std::string>();
  auto p = property_from_acronym(s);
  if (!p) throw ParseError("unknown property '" + s + "'");
  return *p;
}

CharacteristicId characteristic_at(const json& j) {
  auto s = j.get<std::string>();
  auto c = characteristic_from_name(s);
  if (!c) throw ParseError("unknown characteristic '" + s + "'");
  return *c;
}

std::vector<PropertyId> properties_at(const json& j) {
  std::vector<PropertyId> out;
  for (const auto& e : j) out.push_back(property_at(e));
  return out;
}

Verdict::Status status_from(const std::string& s) {
  if (s == "eligible") return Verdict::Status::eligible;
  if (s == "not_eligible") return Verdict::Status::not_eligible;
  if (s == "not_evaluated") return Verdict::Status::not_evaluated;
  throw ParseError("unknown verdict status '" + s + "'");
}

json verdict_to_json(const Verdict& v) {
  json reasons = json::array();
  for (const auto& [c, level] : v.reasons) {
    reasons.push_back({{"characteristic", std::string(name(c))}, {"level", level}});
  }
  return {{"status", std::string(to_string(v.status))}, {"reasons", reasons}};
}

}  // namespace

json report_to_json(const EvaluationReport& r) {
  json rows = json::object();
  for (const auto& [e, n] : r.scope.rows) rows[e] = n;
  json per_char = json::object();
  for (const auto& [c, n] : r.scope.rules_per_characteristic) per_char[std::string(name(c))] = n;

  json measures = json::array();
  for (const auto& m : r.measures) {
    measures.push_back({{"rule_id", m.rule_id},
                        {"entity", m.entity},
                        {"property", std::string(acronym(m.property))},
                        {"kind", std::string(kind_name(m.kind))},
                        {"A", m.a},
                        {"B", m.b},
                        {"ratio", m.b ? json(ratio_text(m.a, m.b)) : json()},
                        {"failing_count", m.failing_count}});
  }
  json props = json::array();
  for (const auto& p : r.properties) {
    props.push_back({{"property", std::string(acronym(p.property))},
                     {"name", std::string(display_name(p.property))},
                     {"characteristic", std::string(name(characteristic_of(p.property)))},
                     {"value", opt(p.value)},
                     {"level", opt(p.level)},
                     {"sum_a", p.sum_a},
                     {"sum_b", p.sum_b},
                     {"rules", p.rule_count}});
  }
  json chars = json::array();
  for (const auto& c : r.characteristics) {
    chars.push_back({{"characteristic", std::string(name(c.characteristic))},
                     {"profile", c.profile},
                     {"level", opt(c.level)},
                     {"strengths", acronyms(c.strengths)},
                     {"weaknesses", acronyms(c.weaknesses)}});
  }
  return {{"format", std::string(kReportFormat)},
          {"metadata",
           {{"ruleset",
             {{"name", r.metadata.ruleset_name},
              {"version", r.metadata.ruleset_version},
              {"fingerprint", r.metadata.ruleset_fingerprint}}},
            {"snapshot_fingerprint", r.metadata.snapshot_fingerprint},
            {"reference_time", r.metadata.reference_time.to_string()},
            {"tool_version", r.metadata.tool_version},
            {"config", r.metadata.config}}},
          {"scope",
           {{"entities", r.scope.rows.size()},
            {"rows", rows},
            {"rules", r.scope.rule_count},
            {"rules_per_characteristic", per_char}}},
          {"measures", measures},
          {"properties", props},
          {"characteristics", chars},
          {"verdict", verdict_to_json(r.verdict)}};
}

EvaluationReport report_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kReportFormat) {
      throw ParseError("not an evaluation report (format " + j.at("format").dump() + ")");
    }
    EvaluationReport r;
    const json& md = j.at("metadata");
    r.metadata.ruleset_name = md.at("ruleset").at("name").get<std::string>();
    r.metadata.ruleset_version = md.at("ruleset").at("version").get<std::string>();
    r.metadata.ruleset_fingerprint = md.at("ruleset").at("fingerprint").get<std::string>();
    r.metadata.snapshot_fingerprint = md.at("snapshot_fingerprint").get<std::string>();
    auto ts = Timestamp::parse(md.at("reference_time").get<std::string>());
    if (!ts) throw ParseError("invalid reference_time");
    r.metadata.reference_time = *ts;
    r.metadata.tool_version = md.at("tool_version").get<std::string>();
    r.metadata.config = md.at("config");

    const json& scope = j.at("scope");
    for (auto it = scope.at("rows").begin(); it != scope.at("rows").end(); ++it) {
      r.scope.rows[it.key()] = it->get<std::size_t>();
    }
    const json& per_char = scope.at("rules_per_characteristic");
    for (auto it = per_char.begin(); it != per_char.end(); ++it) {
      r.scope.rules_per_characteristic[characteristic_at(json(it.key()))] = it->get<std::size_t>();
    }
    r.scope.rule_count = scope.at("rules").get<std::size_t>();

    for (const auto& m : j.at("measures")) {
      auto kind = kind_from_name(m.at("kind").get<std::string>());
      if (!kind) throw ParseError("unknown kind " + m.at("kind").dump());
      MeasureSummary s{m.at("rule_id").get<std::string>(), m.at("entity").get<std::string>(),
                       property_at(m.at("property")), *kind, m.at("A").get<std::uint64_t>(),
                       m.at("B").get<std::uint64_t>(), m.at("failing_count").get<std::uint64_t>()};
      if (s.a > s.b) throw ParseError("measure " + s.rule_id + " has A > B");
      r.measures.push_back(std::move(s));
    }
    for (const auto& p : j.at("properties")) {
      r.properties.push_back({property_at(p.at("property")), get_opt_double(p, "value"),
                              get_opt_int(p, "level"), p.at("sum_a").get<std::uint64_t>(),
                              p.at("sum_b").get<std::uint64_t>(), p.at("rules").get<std::size_t>()});
    }
    for (const auto& c : j.at("characteristics")) {
      CharacteristicResult cr;
      cr.characteristic = characteristic_at(c.at("characteristic"));
      cr.profile = c.at("profile").get<Profile>();
      cr.level = get_opt_int(c, "level");
      cr.strengths = properties_at(c.at("strengths"));
      cr.weaknesses = properties_at(c.at("weaknesses"));
      r.characteristics.push_back(std::move(cr));
    }
    const json& v = j.at("verdict");
    r.verdict.status = status_from(v.at("status").get<std::string>());
    for (const auto& reason : v.at("reasons")) {
      r.verdict.reasons.emplace_back(characteristic_at(reason.at("characteristic")),
                                     reason.at("level").get<int>());
    }
    return r;
  } catch (const json::exception& e) {
    std::string msg = e.what();
    if (auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ParseError("invalid report: " + msg);
  }
}

std::string serialize_report(const EvaluationReport& r) { return report_to_json(r).dump(2) + "\n"; }

EvaluationReport parse_report(std::string_view document) {
  return report_from_json(detail::parse_json(document));
}

// ---------------------------------------------------------------------------
// Selectors

namespace {

ExprPtr make(Expr::Literal l) { return std::make_shared<const Expr>(Expr{std::move(l)}); }
ExprPtr column_ref(const std::string& c) { return std::make_shared<const Expr>(Expr{Expr::Column{c}}); }
ExprPtr unary(UnaryOp op, ExprPtr e) {
  return std::make_shared<const Expr>(Expr{Expr::Unary{op, std::move(e)}});
}
ExprPtr binary(BinaryOp op, ExprPtr l, ExprPtr r) {
  return std::make_shared<const Expr>(Expr{Expr::Binary{op, std::move(l), std::move(r)}});
}
ExprPtr any_of(std::vector<ExprPtr> parts, BinaryOp op) {
  ExprPtr out;
  for (auto& p : parts) out = out ? binary(op, out, std::move(p)) : std::move(p);
  return out;
}
ExprPtr in_set(const std::string& c, const std::vector<Value>& values) {
  Expr::Call call{Function::in_set, {column_ref(c)}, std::nullopt};
  for (const auto& v : values) call.args.push_back(make(Expr::Literal{v}));
  return std::make_shared<const Expr>(Expr{std::move(call)});
}

std::vector<Value> coerced(const std::vector<Value>& literals, DataType type) {
  std::vector<Value> out;
  for (const auto& l : literals) {
    if (auto v = coerce(l, type)) out.push_back(std::move(*v));
  }
  return out;
}

// Expression true for a non-null value of `c` that fails the check;
// nullptr when every non-null value passes; nullopt when the check has no
// row-local form.
std::optional<ExprPtr> bad_value(const Rule& rule, const ColumnSchema& col) {
  const std::string& c = col.name;
  switch (rule.tag()) {
    case KindTag::syntax:
    case KindTag::format_class: {
      if (col.type != DataType::text) return std::nullopt;
      const Pattern& p = rule.tag() == KindTag::syntax ? std::get<SyntaxCheck>(rule.kind).pattern
                                                       : std::get<FormatClassCheck>(rule.kind).pattern;
      Expr::Call call{Function::regex_match, {column_ref(c), make(Expr::Literal{Value(p.source())})}, p};
      return unary(UnaryOp::logical_not, std::make_shared<const Expr>(Expr{std::move(call)}));
    }
    case KindTag::range: {
      const auto& k = std::get<RangeCheck>(rule.kind);
      std::vector<ExprPtr> parts;
      if (k.min) {
        auto lo = coerce(*k.min, col.type);
        if (!lo) return std::nullopt;
        parts.push_back(binary(k.min_inclusive ? BinaryOp::lt : BinaryOp::le, column_ref(c),
                               make(Expr::Literal{*lo})));
      }
      if (k.max) {
        auto hi = coerce(*k.max, col.type);
        if (!hi) return std::nullopt;
        parts.push_back(binary(k.max_inclusive ? BinaryOp::gt : BinaryOp::ge, column_ref(c),
                               make(Expr::Literal{*hi})));
      }
      return any_of(std::move(parts), BinaryOp::logical_or);
    }
    case KindTag::domain: {
      const auto& k = std::get<DomainCheck>(rule.kind);
      if (k.reference) return std::nullopt;
      return unary(UnaryOp::logical_not, in_set(c, coerced(k.allowed, col.type)));
    }
    case KindTag::not_null: return ExprPtr{};
    case KindTag::no_default:
      return in_set(c, coerced(std::get<NoDefaultCheck>(rule.kind).placeholders, col.type));
    default: return std::nullopt;
  }
}

}  // namespace

std::optional<std::string> failing_selector(const Rule& rule, const std::string& entity,
                                            const SchemaCatalog& catalog, const RuleSet& rs) {
  const EntitySchema* schema = catalog.find(entity);
  if (!schema) return std::nullopt;
  const bool own = entity == rule.entity;
  ExprPtr result;
  switch (rule.tag()) {
    case KindTag::predicate: {
      const auto& p = std::get<PredicateCheck>(rule.kind).expr;
      if (rule.skip_null) {
        std::vector<ExprPtr> parts;
        for (const auto& c : referenced_columns(*p)) {
          parts.push_back(unary(UnaryOp::is_not_null, column_ref(c)));
        }
        parts.push_back(unary(UnaryOp::logical_not, p));
        result = any_of(std::move(parts), BinaryOp::logical_and);
      } else {
        result = binary(BinaryOp::logical_or, unary(UnaryOp::is_null, p),
                        unary(UnaryOp::logical_not, p));
      }
      break;
    }
    case KindTag::freshness: {
      const auto& k = std::get<FreshnessCheck>(rule.kind);
      ExprPtr ts = column_ref(k.timestamp_column);
      ExprPtr stale = binary(BinaryOp::lt, ts,
                             make(Expr::Literal{Value(Timestamp{rs.reference_time.micros - k.max_age_micros})}));
      result = rule.skip_null ? stale : binary(BinaryOp::logical_or, unary(UnaryOp::is_null, ts), stale);
      if (k.condition) result = binary(BinaryOp::logical_and, k.condition, result);
      break;
    }
    default: {
      std::vector<EntityColumn> targets;
      for (const auto& t : rule_targets(rule)) {
        if (t.entity == entity) targets.push_back(t);
      }
      if (targets.empty()) return std::nullopt;
      std::vector<ExprPtr> clauses;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const ColumnSchema* col = schema->column(targets[i].column);
        if (!col) return std::nullopt;
        auto bad = bad_value(rule, *col);
        if (!bad) return std::nullopt;
        ExprPtr c = column_ref(col->name);
        ExprPtr clause;
        if (rule.skip_null) {
          clause = *bad ? binary(BinaryOp::logical_and, unary(UnaryOp::is_not_null, c), *bad)
                        : make(Expr::Literal{Value(false)});
        } else {
          clause = *bad ? binary(BinaryOp::logical_or, unary(UnaryOp::is_null, c), *bad)
                        : unary(UnaryOp::is_null, c);
        }
        // Own-entity targets honor the rule's where filter; for format_class
        // that is the first rule.columns.size() targets.
        bool filtered = own && rule.where && i < rule.columns.size();
        if (filtered) clause = binary(BinaryOp::logical_and, rule.where, clause);
        clauses.push_back(std::move(clause));
      }
      return to_text(*any_of(std::move(clauses), BinaryOp::logical_or));
    }
  }
  if (!own) return std::nullopt;
  if (rule.where) result = binary(BinaryOp::logical_and, rule.where, result);
  return to_text(*result);
}

// ---------------------------------------------------------------------------
// Manifests

namespace {

json value_to_json(const Value& v) {
  if (v.is_null()) return nullptr;
  if (const auto* s = v.text()) return *s;
  if (const auto* i = v.integer()) return *i;
  if (const auto* b = v.boolean()) return *b;
  return v.to_string();
}

}  // namespace

std::string ImprovementManifest::file_name() const {
  return entity + "." + std::string(acronym(property)) + ".manifest.json";
}

std::vector<ImprovementManifest> build_improvement(const EvaluationReport& report,
                                                   const MeasureSet& ms, const RuleSet& rs,
                                                   const SchemaCatalog& catalog) {
  if (report.metadata.snapshot_fingerprint != ms.snapshot_fingerprint) {
    throw FingerprintMismatch("snapshot fingerprint " + ms.snapshot_fingerprint +
                              " does not match report (" + report.metadata.snapshot_fingerprint + ")");
  }
  if (report.metadata.ruleset_fingerprint != ms.ruleset_fingerprint) {
    throw FingerprintMismatch("ruleset fingerprint " + ms.ruleset_fingerprint +
                              " does not match report (" + report.metadata.ruleset_fingerprint + ")");
  }
  std::map<std::pair<std::string, PropertyId>, ImprovementManifest> groups;
  auto manifest_for = [&](const std::string& entity, PropertyId p) -> ImprovementManifest& {
    auto [it, fresh] = groups.try_emplace({entity, p});
    ImprovementManifest& m = it->second;
    if (fresh) {
      m.entity = entity;
      m.property = p;
      if (const auto* rp = report.property(p)) m.property_level = rp->level;
      m.weakness = m.property_level && *m.property_level <= kWeaknessLevel;
      if (const auto* schema = catalog.find(entity)) m.key_columns = schema->key;
    }
    return m;
  };

  for (const auto& [id, measure] : ms.measures) {
    if (measure.failing_count == 0) continue;
    const Rule* rule = rs.find(id);
    if (!rule) throw FingerprintMismatch("rule " + id + " is not in the ruleset");
    if (is_entity_level(measure.kind)) {
      ManifestRule mr{id, measure.kind, measure.a, measure.b, measure.failing_count, {}, false, std::nullopt};
      manifest_for(measure.entity, measure.property).rules.push_back(std::move(mr));
      continue;
    }
    // Split refs by entity; format_class rules can span several.
    std::map<std::string, std::vector<RecordRef>> by_entity;
    for (const auto& ref : measure.failing) by_entity[ref.entity].push_back(ref);
    const bool truncated = measure.failing.size() < measure.failing_count;
    if (by_entity.empty()) by_entity[measure.entity];
    for (auto& [entity, refs] : by_entity) {
      ManifestRule mr;
      mr.rule_id = id;
      mr.kind = measure.kind;
      mr.a = measure.a;
      mr.b = measure.b;
      mr.failing_count = by_entity.size() == 1 ? measure.failing_count : refs.size();
      mr.truncated = truncated;
      mr.refs = std::move(refs);
      mr.selector = failing_selector(*rule, entity, catalog, rs);
      manifest_for(entity, measure.property).rules.push_back(std::move(mr));
    }
  }
  std::vector<ImprovementManifest> out;
  for (auto& [key, m] : groups) out.push_back(std::move(m));
  return out;
}

json manifest_to_json(const ImprovementManifest& m) {
  json rules = json::array();
  for (const auto& r : m.rules) {
    json refs = json::array();
    for (const auto& ref : r.refs) {
      json key = json::array();
      for (const auto& v : ref.key) key.push_back(value_to_json(v));
      refs.push_back({{"ordinal", ref.ordinal},
                      {"column", ref.column.empty() ? json() : json(ref.column)},
                      {"key", key}});
    }
    rules.push_back({{"rule_id", r.rule_id},
                     {"kind", std::string(kind_name(r.kind))},
                     {"A", r.a},
                     {"B", r.b},
                     {"failing_count", r.failing_count},
                     {"truncated", r.truncated},
                     {"selector", r.selector ? json(*r.selector) : json()},
                     {"refs", refs}});
  }
  return {{"entity", m.entity},
          {"property", std::string(acronym(m.property))},
          {"property_name", std::string(display_name(m.property))},
          {"characteristic", std::string(name(characteristic_of(m.property)))},
          {"property_level", opt(m.property_level)},
          {"weakness", m.weakness},
          {"key_columns", m.key_columns},
          {"rules", rules}};
}

json manifest_index(const EvaluationReport& report, const std::vector<ImprovementManifest>& manifests) {
  json entries = json::array();
  for (const auto& m : manifests) {
    std::uint64_t failing = 0;
    for (const auto& r : m.rules) failing += r.failing_count;
    entries.push_back({{"file", m.file_name()},
                       {"entity", m.entity},
                       {"property", std::string(acronym(m.property))},
                       {"weakness", m.weakness},
                       {"rules", m.rules.size()},
                       {"failing_count", failing}});
  }
  return {{"ruleset_fingerprint", report.metadata.ruleset_fingerprint},
          {"snapshot_fingerprint", report.metadata.snapshot_fingerprint},
          {"manifests", entries}};
}

void write_manifests(const std::filesystem::path& dir, const EvaluationReport& report,
                     const std::vector<ImprovementManifest>& manifests) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& m : manifests) write_file(dir / m.file_name(), manifest_to_json(m).dump(2) + "\n");
  write_file(dir / "index.json", manifest_index(report, manifests).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Comparison

ComparisonReport compare(const EvaluationReport& first, const EvaluationReport& second) {
  if (first.metadata.ruleset_name != second.metadata.ruleset_name) {
    throw ScopeMismatch("reports use different rulesets ('" + first.metadata.ruleset_name +
                        "' vs '" + second.metadata.ruleset_name + "')");
  }
  std::set<CharacteristicId> c1;
  std::set<CharacteristicId> c2;
  for (const auto& c : first.characteristics) c1.insert(c.characteristic);
  for (const auto& c : second.characteristics) c2.insert(c.characteristic);
  bool shared_any = std::any_of(c1.begin(), c1.end(), [&](CharacteristicId c) { return c2.count(c) > 0; });
  if (!shared_any) throw ScopeMismatch("reports share no characteristic");

  ComparisonReport out;
  out.ruleset_name = first.metadata.ruleset_name;
  out.first_version = first.metadata.ruleset_version;
  out.second_version = second.metadata.ruleset_version;
  out.first_verdict = first.verdict.status;
  out.second_verdict = second.verdict.status;

  for (PropertyId p : kAllProperties) {
    const ReportProperty* a = first.property(p);
    const ReportProperty* b = second.property(p);
    if (a && !b) out.removed.push_back(p);
    if (!a && b) out.added.push_back(p);
    if (!a || !b) continue;
    PropertyDelta d{p, a->value, b->value, std::nullopt, a->level, b->level, std::nullopt};
    if (a->value && b->value) d.value_delta = round4(*b->value - *a->value);
    if (a->level && b->level) d.level_delta = *b->level - *a->level;
    if ((d.value_delta && *d.value_delta < 0) || (d.level_delta && *d.level_delta < 0)) {
      out.regression = true;
    }
    out.properties.push_back(d);
  }
  for (CharacteristicId c : kAllCharacteristics) {
    const CharacteristicResult* a = first.characteristic(c);
    const CharacteristicResult* b = second.characteristic(c);
    if (a && !b) out.removed_characteristics.push_back(c);
    if (!a && b) out.added_characteristics.push_back(c);
    if (!a || !b) continue;
    CharacteristicDelta d{c, a->level, b->level, std::nullopt};
    if (a->level && b->level) d.level_delta = *b->level - *a->level;
    if (d.level_delta && *d.level_delta < 0) out.regression = true;
    out.characteristics.push_back(d);
  }
  return out;
}

json comparison_to_json(const ComparisonReport& c) {
  json props = json::array();
  for (const auto& p : c.properties) {
    props.push_back({{"property", std::string(acronym(p.property))},
                     {"first", opt(p.first)},
                     {"second", opt(p.second)},
                     {"value_delta", opt(p.value_delta)},
                     {"first_level", opt(p.first_level)},
                     {"second_level", opt(p.second_level)},
                     {"level_delta", opt(p.level_delta)}});
  }
  json chars = json::array();
  for (const auto& d : c.characteristics) {
    chars.push_back({{"characteristic", std::string(name(d.characteristic))},
                     {"first", opt(d.first)},
                     {"second", opt(d.second)},
                     {"level_delta", opt(d.level_delta)}});
  }
  auto names = [](const std::vector<CharacteristicId>& cs) {
    json out = json::array();
    for (auto ch : cs) out.push_back(std::string(name(ch)));
    return out;
  };
  return {{"format", std::string(kComparisonFormat)},
          {"ruleset", {{"name", c.ruleset_name}, {"first_version", c.first_version},
                       {"second_version", c.second_version}}},
          {"properties", props},
          {"added", acronyms(c.added)},
          {"removed", acronyms(c.removed)},
          {"characteristics", chars},
          {"added_characteristics", names(c.added_characteristics)},
          {"removed_characteristics", names(c.removed_characteristics)},
          {"regression", c.regression},
          {"verdict", {{"first", std::string(to_string(c.first_verdict))},
                       {"second", std::string(to_string(c.second_verdict))}}}};
}

std::string serialize_comparison(const ComparisonReport& c) {
  return comparison_to_json(c).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Text rendering

namespace {

std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

std::string fixed4(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::string signed4(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.4f", *v);
  return buf;
}

std::string level_text(const std::optional<int>& l) { return l ? std::to_string(*l) : "n/a"; }

std::string signed_int(const std::optional<int>& v) {
  if (!v) return "n/a";
  return (*v > 0 ? "+" : "") + std::to_string(*v);
}

std::string join_acronyms(const std::vector<PropertyId>& ps) {
  if (ps.empty()) return "-";
  std::string out;
  for (auto p : ps) {
    if (!out.empty()) out += ",";
    out += acronym(p);
  }
  return out;
}

std::string verdict_words(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::eligible: return "ELIGIBLE";
    case Verdict::Status::not_eligible: return "NOT ELIGIBLE";
    case Verdict::Status::not_evaluated: return "NOT EVALUATED";
  }
  return "NOT EVALUATED";
}

}  // namespace

std::string render_text(const EvaluationReport& r) {
  std::ostringstream out;
  out << "Data quality evaluation: " << r.metadata.ruleset_name << " " << r.metadata.ruleset_version
      << "\n";
  out << "Reference time: " << r.metadata.reference_time.to_string() << "\n";
  std::size_t rows = 0;
  for (const auto& [e, n] : r.scope.rows) rows += n;
  out << "Scope: " << r.scope.rows.size() << " entities, " << rows << " rows, "
      << r.scope.rule_count << " rules\n";
  out << "Snapshot: " << r.metadata.snapshot_fingerprint.substr(0, 16)
      << "  Ruleset: " << r.metadata.ruleset_fingerprint.substr(0, 16) << "\n\n";

  out << pad("CHARACTERISTIC", 16) << pad("LEVEL", 6, true) << "  " << pad("PROFILE", 16)
      << pad("STRENGTHS", 46) << "  WEAKNESSES\n";
  for (const auto& c : r.characteristics) {
    std::string profile = "<";
    for (std::size_t i = 0; i < c.profile.size(); ++i) {
      profile += (i ? "," : "") + std::to_string(c.profile[i]);
    }
    profile += ">";
    out << pad(std::string(name(c.characteristic)), 16) << pad(level_text(c.level), 6, true)
        << "  " << pad(profile, 16) << pad(join_acronyms(c.strengths), 46) << "  "
        << join_acronyms(c.weaknesses) << "\n";
  }
  out << "\n"
      << pad("PROPERTY", 14) << pad("NAME", 34) << pad("VALUE", 10, true) << pad("LEVEL", 7, true)
      << pad("RULES", 7, true) << pad("A", 12, true) << pad("B", 12, true) << "\n";
  for (const auto& p : r.properties) {
    out << pad(std::string(acronym(p.property)), 14) << pad(std::string(display_name(p.property)), 34)
        << pad(fixed4(p.value), 10, true) << pad(level_text(p.level), 7, true)
        << pad(std::to_string(p.rule_count), 7, true) << pad(std::to_string(p.sum_a), 12, true)
        << pad(std::to_string(p.sum_b), 12, true) << "\n";
  }
  out << "\n";
  if (r.verdict.status == Verdict::Status::eligible) {
    out << "VERDICT: ELIGIBLE (min level 3 rule)\n";
  } else if (r.verdict.status == Verdict::Status::not_eligible) {
    out << "VERDICT: NOT ELIGIBLE (";
    for (std::size_t i = 0; i < r.verdict.reasons.size(); ++i) {
      if (i) out << ", ";
      out << name(r.verdict.reasons[i].first) << " level " << r.verdict.reasons[i].second;
    }
    out << " below 3)\n";
  } else {
    out << "VERDICT: NOT EVALUATED (no characteristic evaluated)\n";
  }
  return out.str();
}

std::string render_text(const ComparisonReport& c) {
  std::ostringstream out;
  out << "Comparison: " << c.ruleset_name << " " << c.first_version << " -> " << c.second_version
      << "\n\n";
  out << pad("CHARACTERISTIC", 16) << pad("BEFORE", 8, true) << pad("AFTER", 8, true)
      << pad("DELTA", 8, true) << "\n";
  for (const auto& d : c.characteristics) {
    out << pad(std::string(name(d.characteristic)), 16) << pad(level_text(d.first), 8, true)
        << pad(level_text(d.second), 8, true) << pad(signed_int(d.level_delta), 8, true) << "\n";
  }
  for (auto ch : c.added_characteristics) out << "added characteristic: " << name(ch) << "\n";
  for (auto ch : c.removed_characteristics) out << "removed characteristic: " << name(ch) << "\n";
  out << "\n"
      << pad("PROPERTY", 14) << pad("BEFORE", 10, true) << pad("AFTER", 10, true)
      << pad("DELTA", 11, true) << pad("LEVELS", 10, true) << "\n";
  for (const auto& p : c.properties) {
    out << pad(std::string(acronym(p.property)), 14) << pad(fixed4(p.first), 10, true)
        << pad(fixed4(p.second), 10, true) << pad(signed4(p.value_delta), 11, true)
        << pad(level_text(p.first_level) + "->" + level_text(p.second_level), 10, true) << "\n";
  }
  for (auto p : c.added) out << "added property: " << acronym(p) << "\n";
  for (auto p : c.removed) out << "removed property: " << acronym(p) << "\n";
  out << "\nREGRESSION: " << (c.regression ? "yes" : "no") << "\n";
  out << "VERDICT: " << verdict_words(c.first_verdict) << " -> " << verdict_words(c.second_verdict)
      << "\n";
  return out.str();
}

}  // namespace dq
