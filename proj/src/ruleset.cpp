#include "dq/ruleset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>

#include "json_locate.hpp"

namespace dq {

using nlohmann::json;

std::optional<EntityColumn> EntityColumn::parse(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 >= text.size()) return std::nullopt;
  return EntityColumn{std::string(text.substr(0, dot)), std::string(text.substr(dot + 1))};
}

namespace {

constexpr std::array<std::string_view, kKindCount> kKindNames{
    "syntax",      "range",        "domain",    "not_null",  "no_default", "unique",
    "min_count",   "foreign_key",  "format_class", "predicate", "freshness", "frequency"};

using P = PropertyId;
const std::array<std::vector<PropertyId>, kKindCount>& compatibility() {
  static const std::array<std::vector<PropertyId>, kKindCount> table{{
      {P::syntactic_accuracy, P::format_consistency},                      // syntax
      {P::accuracy_range},                                                 // range
      {P::semantic_accuracy, P::value_credibility},                        // domain
      {P::record_completeness, P::data_value_completeness},                // not_null
      {P::data_value_completeness},                                        // no_default
      {P::false_file_completeness, P::inconsistency_risk},                 // unique
      {P::file_completeness},                                              // min_count
      {P::referential_integrity},                                          // foreign_key
      {P::format_consistency},                                             // format_class
      {P::semantic_consistency, P::value_credibility, P::source_credibility,
       P::inconsistency_risk, P::semantic_accuracy},                       // predicate
      {P::timeliness_of_update},                                           // freshness
      {P::update_frequency},                                               // frequency
  }};
  return table;
}

}  // namespace

KindTag tag_of(const RuleKind& k) { return static_cast<KindTag>(k.index()); }

std::string_view kind_name(KindTag t) { return kKindNames[static_cast<std::size_t>(t)]; }

std::optional<KindTag> kind_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<KindTag>(i);
  }
  return std::nullopt;
}

bool is_entity_level(KindTag t) { return t == KindTag::min_count || t == KindTag::frequency; }

std::span<const PropertyId> compatible_properties(KindTag t) {
  return compatibility()[static_cast<std::size_t>(t)];
}

bool is_compatible(KindTag t, PropertyId p) {
  auto props = compatible_properties(t);
  return std::find(props.begin(), props.end(), p) != props.end();
}

const Rule* RuleSet::find(std::string_view rule_id) const {
  for (const auto& r : rules) {
    if (r.id == rule_id) return &r;
  }
  return nullptr;
}

std::vector<EntityColumn> rule_targets(const Rule& rule) {
  switch (rule.tag()) {
    case KindTag::syntax:
    case KindTag::range:
    case KindTag::domain:
    case KindTag::not_null:
    case KindTag::no_default:
    case KindTag::foreign_key:
    case KindTag::format_class: break;
    default: return {};
  }
  std::vector<EntityColumn> out;
  for (const auto& c : rule.columns) out.push_back({rule.entity, c});
  if (const auto* fc = std::get_if<FormatClassCheck>(&rule.kind)) {
    out.insert(out.end(), fc->extra_targets.begin(), fc->extra_targets.end());
  }
  return out;
}

std::string Diagnostic::to_string() const {
  return std::string(level == Level::error ? "ERROR" : "WARNING") + " " + rule_id + ": " + message;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.level == Diagnostic::Level::error; });
}

std::map<PropertyId, std::vector<const Rule*>> rules_by_property(const RuleSet& rs) {
  std::map<PropertyId, std::vector<const Rule*>> out;
  for (const auto& r : rs.rules) out[r.property].push_back(&r);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

Value literal_from_json(const json& j, const std::string& what) {
  switch (j.type()) {
    case json::value_t::number_integer: return Value(j.get<std::int64_t>());
    case json::value_t::number_unsigned: {
      auto u = j.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX)) throw ParseError(what + ": integer too large");
      return Value(static_cast<std::int64_t>(u));
    }
    case json::value_t::number_float: {
      std::array<char, 64> buf{};
      auto res = std::to_chars(buf.data(), buf.data() + buf.size(), j.get<double>(),
                               std::chars_format::fixed);
      auto d = Decimal::parse(std::string_view(buf.data(), static_cast<std::size_t>(res.ptr - buf.data())));
      if (!d) throw ParseError(what + ": decimal out of range or over 12 fractional digits");
      return Value(*d);
    }
    case json::value_t::string: return Value(j.get<std::string>());
    case json::value_t::boolean: return Value(j.get<bool>());
    default: throw ParseError(what + ": literal must be a number, string or boolean");
  }
}

json literal_to_json(const Value& v) {
  if (const auto* i = v.integer()) return *i;
  if (const auto* d = v.decimal()) return d->to_double();
  if (const auto* b = v.boolean()) return *b;
  if (const auto* s = v.text()) return *s;
  return v.to_string();  // timestamps never come from documents, but keep them readable
}

class ParamReader {
 public:
  ParamReader(const json& params, std::string kind) : params_(params), kind_(std::move(kind)) {
    if (!params_.is_object()) throw ParseError("'params' must be an object");
  }

  const json* get(const char* key) {
    used_.insert(key);
    auto it = params_.find(key);
    if (it == params_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const json& require(const char* key) {
    const json* j = get(key);
    if (!j) throw ParseError(kind_ + " rule requires param '" + key + "'");
    return *j;
  }

  std::string require_string(const char* key) {
    const json& j = require(key);
    if (!j.is_string()) throw ParseError("param '" + std::string(key) + "' must be a string");
    return j.get<std::string>();
  }

  std::optional<std::string> optional_string(const char* key) {
    const json* j = get(key);
    if (!j) return std::nullopt;
    if (!j->is_string()) throw ParseError("param '" + std::string(key) + "' must be a string");
    return j->get<std::string>();
  }

  bool optional_bool(const char* key, bool fallback) {
    const json* j = get(key);
    if (!j) return fallback;
    if (!j->is_boolean()) throw ParseError("param '" + std::string(key) + "' must be a boolean");
    return j->get<bool>();
  }

  std::vector<Value> literal_list(const char* key) {
    const json& j = require(key);
    if (!j.is_array()) throw ParseError("param '" + std::string(key) + "' must be an array");
    std::vector<Value> out;
    for (const auto& e : j) out.push_back(literal_from_json(e, key));
    return out;
  }

  std::int64_t duration(const char* key) {
    const json& j = require(key);
    std::optional<std::int64_t> d;
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
      d = parse_duration(std::to_string(j.get<std::int64_t>()));
    } else if (j.is_string()) {
      d = parse_duration(j.get<std::string>());
    }
    if (!d) throw ParseError("param '" + std::string(key) + "' must be a duration like \"30d\"");
    return *d;
  }

  EntityColumn entity_column(const json& j, const char* what) {
    if (!j.is_string()) throw ParseError(std::string(what) + " must be \"entity.column\"");
    auto ec = EntityColumn::parse(j.get<std::string>());
    if (!ec) throw ParseError(std::string(what) + " must be \"entity.column\"");
    return *ec;
  }

  void finish() const {
    for (auto it = params_.begin(); it != params_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ParseError("unknown param '" + it.key() + "' for " + kind_ + " rule");
      }
    }
  }

 private:
  const json& params_;
  std::string kind_;
  std::set<std::string> used_;
};

ExprPtr parse_embedded_expr(const std::string& text, const std::string& what) {
  try {
    return parse_expr(text);
  } catch (const ParseError& e) {
    throw ParseError(what + " expression, column " + std::to_string(e.column()) + ": " + e.message());
  }
}

Pattern compile_pattern(const std::string& text, const std::string& what) {
  try {
    return Pattern::compile(text);
  } catch (const PatternError& e) {
    throw ParseError(what + ": " + e.what());
  }
}

// Orders two range bounds when they are comparable as written.
std::optional<std::strong_ordering> order_bounds(const Value& a, const Value& b) {
  if (auto c = compare(a, b); c && !(a.text() && b.text())) return c;
  if (a.text() && b.text()) {
    auto ta = Timestamp::parse(*a.text());
    auto tb = Timestamp::parse(*b.text());
    if (ta && tb) return *ta <=> *tb;
    auto da = Decimal::parse(*a.text());
    auto db = Decimal::parse(*b.text());
    if (da && db) return *da <=> *db;
    return *a.text() <=> *b.text();
  }
  if (a.text() || b.text()) {
    // One side written as text: try to read it in the other's type.
    const Value& typed = a.text() ? b : a;
    if (auto t = typed.type()) {
      auto ca = coerce(a, *t);
      auto cb = coerce(b, *t);
      if (ca && cb) return compare(*ca, *cb);
    }
  }
  return std::nullopt;
}

RuleKind parse_kind(KindTag tag, ParamReader& p, Rule& rule, const RuleSet& rs) {
  switch (tag) {
    case KindTag::syntax:
      return SyntaxCheck{compile_pattern(p.require_string("pattern"), "syntax pattern")};
    case KindTag::range: {
      RangeCheck r;
      if (const json* j = p.get("min")) r.min = literal_from_json(*j, "min");
      if (const json* j = p.get("max")) r.max = literal_from_json(*j, "max");
      r.min_inclusive = p.optional_bool("min_inclusive", true);
      r.max_inclusive = p.optional_bool("max_inclusive", true);
      if (!r.min && !r.max) throw ParseError("range rule needs at least one of min/max");
      if (r.min && r.max) {
        auto c = order_bounds(*r.min, *r.max);
        if (c && *c > 0) throw ParseError("range rule has min > max");
      }
      return r;
    }
    case KindTag::domain: {
      DomainCheck d;
      bool has_values = p.get("values") != nullptr;
      const json* ref = p.get("reference");
      if (has_values == (ref != nullptr)) {
        throw ParseError("domain rule needs exactly one of 'values' or 'reference'");
      }
      if (has_values) {
        d.allowed = p.literal_list("values");
        if (d.allowed.empty()) throw ParseError("domain 'values' must not be empty");
      } else {
        d.reference = p.entity_column(*ref, "domain reference");
      }
      return d;
    }
    case KindTag::not_null: return NotNullCheck{};
    case KindTag::no_default: {
      NoDefaultCheck n{p.literal_list("placeholders")};
      if (n.placeholders.empty()) throw ParseError("no_default 'placeholders' must not be empty");
      return n;
    }
    case KindTag::unique: {
      UniqueCheck u;
      if (const json* k = p.get("key")) {
        if (!k->is_array()) throw ParseError("unique 'key' must be an array of column names");
        for (const auto& c : *k) {
          if (!c.is_string()) throw ParseError("unique 'key' must be an array of column names");
          u.key.push_back(c.get<std::string>());
        }
      } else {
        u.key = rule.columns;
      }
      if (u.key.empty()) throw ParseError("unique rule needs a non-empty key");
      std::set<std::string> seen(u.key.begin(), u.key.end());
      if (seen.size() != u.key.size()) throw ParseError("unique key lists a column twice");
      return u;
    }
    case KindTag::min_count: {
      const json& t = p.require("threshold");
      if (!t.is_number_integer() || t.get<std::int64_t>() < 0) {
        throw ParseError("min_count 'threshold' must be a non-negative integer");
      }
      return MinCountCheck{t.get<std::int64_t>()};
    }
    case KindTag::foreign_key:
      return ForeignKeyCheck{p.entity_column(p.require("references"), "foreign_key references")};
    case KindTag::format_class: {
      std::string class_name = p.require_string("class");
      auto it = rs.format_classes.find(class_name);
      if (it == rs.format_classes.end()) {
        throw ParseError("undefined format class '" + class_name + "'");
      }
      std::vector<EntityColumn> extra;
      if (const json* t = p.get("extra_targets")) {
        if (!t->is_array()) throw ParseError("format_class 'extra_targets' must be an array");
        for (const auto& e : *t) extra.push_back(p.entity_column(e, "extra target"));
      }
      if (rule.columns.empty() && extra.empty()) {
        throw ParseError("format_class rule needs at least one target column");
      }
      return FormatClassCheck{class_name,
                              compile_pattern(it->second, "format class '" + class_name + "'"),
                              std::move(extra)};
    }
    case KindTag::predicate:
      return PredicateCheck{parse_embedded_expr(p.require_string("expr"), "predicate")};
    case KindTag::freshness: {
      FreshnessCheck f;
      auto col = p.optional_string("timestamp_column");
      if (!col && rule.columns.size() == 1) col = rule.columns.front();
      if (!col) throw ParseError("freshness rule requires param 'timestamp_column'");
      f.timestamp_column = *col;
      f.max_age_micros = p.duration("max_age");
      if (auto c = p.optional_string("condition")) f.condition = parse_embedded_expr(*c, "condition");
      return f;
    }
    case KindTag::frequency: {
      FrequencyCheck f;
      auto col = p.optional_string("timestamp_column");
      if (!col && rule.columns.size() == 1) col = rule.columns.front();
      if (!col) throw ParseError("frequency rule requires param 'timestamp_column'");
      f.timestamp_column = *col;
      f.max_gap_micros = p.duration("max_gap");
      return f;
    }
  }
  throw ParseError("unhandled kind");
}

bool column_scoped(KindTag t) {
  switch (t) {
    case KindTag::syntax:
    case KindTag::range:
    case KindTag::domain:
    case KindTag::not_null:
    case KindTag::no_default:
    case KindTag::foreign_key: return true;
    default: return false;
  }
}

Rule parse_rule(const json& j, const RuleSet& rs) {
  if (!j.is_object()) throw ParseError("rule must be an object");
  static const std::set<std::string> kKeys{"id",    "entity", "columns",   "property",   "kind",
                                           "params", "where", "skip_null", "description"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kKeys.count(it.key())) throw ParseError("unknown rule key '" + it.key() + "'");
  }
  auto str = [&](const char* key, bool required) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) throw ParseError(std::string("rule needs '") + key + "'");
      return {};
    }
    if (!it->is_string()) throw ParseError(std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  };

  Rule rule;
  rule.id = str("id", true);
  if (rule.id.empty()) throw ParseError("rule id must not be empty");
  auto ctx = [&](const ParseError& e) { return ParseError("rule '" + rule.id + "': " + e.message()); };
  try {
    rule.entity = str("entity", true);
    if (auto c = j.find("columns"); c != j.end() && !c->is_null()) {
      if (!c->is_array()) throw ParseError("'columns' must be an array");
      for (const auto& col : *c) {
        if (!col.is_string()) throw ParseError("'columns' entries must be strings");
        rule.columns.push_back(col.get<std::string>());
      }
    }
    std::string prop = str("property", true);
    auto property = property_from_acronym(prop);
    if (!property) throw ParseError("unknown property acronym '" + prop + "'");
    rule.property = *property;
    std::string kind_text = str("kind", true);
    auto tag = kind_from_name(kind_text);
    if (!tag) throw ParseError("unknown rule kind '" + kind_text + "'");
    if (!is_compatible(*tag, rule.property)) {
      throw ParseError("kind '" + kind_text + "' cannot be categorized under " + prop);
    }
    if (column_scoped(*tag) && rule.columns.empty()) {
      throw ParseError("kind '" + kind_text + "' needs at least one column");
    }
    json empty = json::object();
    auto pit = j.find("params");
    const json& params = (pit == j.end() || pit->is_null()) ? empty : *pit;
    ParamReader reader(params, kind_text);
    rule.kind = parse_kind(*tag, reader, rule, rs);
    reader.finish();
    if (auto w = str("where", false); !w.empty()) rule.where = parse_embedded_expr(w, "where");
    if (auto s = j.find("skip_null"); s != j.end() && !s->is_null()) {
      if (!s->is_boolean()) throw ParseError("'skip_null' must be a boolean");
      rule.skip_null = s->get<bool>();
      if (rule.skip_null && (*tag == KindTag::not_null || *tag == KindTag::no_default)) {
        throw ParseError("skip_null cannot be set on " + kind_text + " rules");
      }
    }
    rule.description = str("description", false);
  } catch (const ParseError& e) {
    throw ctx(e);
  }
  return rule;
}

json params_to_json(const Rule& rule) {
  struct Visitor {
    json operator()(const SyntaxCheck& k) const { return {{"pattern", k.pattern.source()}}; }
    json operator()(const RangeCheck& k) const {
      return {{"min", k.min ? literal_to_json(*k.min) : json()},
              {"max", k.max ? literal_to_json(*k.max) : json()},
              {"min_inclusive", k.min_inclusive},
              {"max_inclusive", k.max_inclusive}};
    }
    json operator()(const DomainCheck& k) const {
      if (k.reference) return {{"reference", k.reference->to_string()}};
      json values = json::array();
      for (const auto& v : k.allowed) values.push_back(literal_to_json(v));
      return {{"values", values}};
    }
    json operator()(const NotNullCheck&) const { return json::object(); }
    json operator()(const NoDefaultCheck& k) const {
      json values = json::array();
      for (const auto& v : k.placeholders) values.push_back(literal_to_json(v));
      return {{"placeholders", values}};
    }
    json operator()(const UniqueCheck& k) const { return {{"key", k.key}}; }
    json operator()(const MinCountCheck& k) const { return {{"threshold", k.threshold}}; }
    json operator()(const ForeignKeyCheck& k) const {
      return {{"references", k.referenced.to_string()}};
    }
    json operator()(const FormatClassCheck& k) const {
      json targets = json::array();
      for (const auto& t : k.extra_targets) targets.push_back(t.to_string());
      return {{"class", k.class_name}, {"extra_targets", targets}};
    }
    json operator()(const PredicateCheck& k) const { return {{"expr", to_text(*k.expr)}}; }
    json operator()(const FreshnessCheck& k) const {
      return {{"timestamp_column", k.timestamp_column},
              {"max_age", format_duration(k.max_age_micros)},
              {"condition", k.condition ? json(to_text(*k.condition)) : json()}};
    }
    json operator()(const FrequencyCheck& k) const {
      return {{"timestamp_column", k.timestamp_column},
              {"max_gap", format_duration(k.max_gap_micros)}};
    }
  };
  return std::visit(Visitor{}, rule.kind);
}

json rule_to_json(const Rule& r) {
  return {{"id", r.id},
          {"entity", r.entity},
          {"columns", r.columns},
          {"property", std::string(acronym(r.property))},
          {"kind", std::string(kind_name(r.tag()))},
          {"params", params_to_json(r)},
          {"where", r.where ? json(to_text(*r.where)) : json()},
          {"skip_null", r.skip_null},
          {"description", r.description}};
}

}  // namespace

RuleSet parse_ruleset(std::string_view document) {
  json doc = detail::parse_json(document);
  if (!doc.is_object()) throw ParseError("rules document must be a JSON object", 1, 1);
  static const std::set<std::string> kTop{"name", "version", "reference_time", "format_classes",
                                          "rules"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!kTop.count(it.key())) throw ParseError("unknown top-level key '" + it.key() + "'", 1, 1);
  }
  RuleSet rs;
  auto top_string = [&](const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_string()) {
      throw ParseError(std::string("rules document needs string '") + key + "'", 1, 1);
    }
    return it->get<std::string>();
  };
  rs.name = top_string("name");
  rs.version = top_string("version");
  auto ref = Timestamp::parse(top_string("reference_time"));
  if (!ref) throw ParseError("reference_time must be an RFC 3339 timestamp with offset", 1, 1);
  rs.reference_time = *ref;
  if (auto fc = doc.find("format_classes"); fc != doc.end() && !fc->is_null()) {
    if (!fc->is_object()) throw ParseError("'format_classes' must be an object", 1, 1);
    for (auto it = fc->begin(); it != fc->end(); ++it) {
      if (!it->is_string()) throw ParseError("format class patterns must be strings", 1, 1);
      compile_pattern(it->get<std::string>(), "format class '" + it.key() + "'");
      rs.format_classes.emplace(it.key(), it->get<std::string>());
    }
  }
  auto rules = doc.find("rules");
  if (rules == doc.end() || !rules->is_array()) {
    throw ParseError("rules document needs a 'rules' array", 1, 1);
  }
  if (rules->empty()) throw ParseError("ruleset must contain at least one rule", 1, 1);
  auto offsets = detail::array_element_offsets(document, "rules");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < rules->size(); ++i) {
    std::size_t offset = i < offsets.size() ? offsets[i] : 0;
    try {
      Rule r = parse_rule((*rules)[i], rs);
      if (!ids.insert(r.id).second) throw ParseError("duplicate rule id '" + r.id + "'");
      rs.rules.push_back(std::move(r));
    } catch (const ParseError& e) {
      detail::fail_at(document, offset, e.message());
    }
  }
  return rs;
}

std::string serialize_ruleset(const RuleSet& rs) {
  json rules = json::array();
  for (const auto& r : rs.rules) rules.push_back(rule_to_json(r));
  json doc = {{"name", rs.name},
              {"version", rs.version},
              {"reference_time", rs.reference_time.to_string()},
              {"format_classes", rs.format_classes},
              {"rules", rules}};
  return doc.dump(2) + "\n";
}

bool operator==(const Rule& a, const Rule& b) { return rule_to_json(a) == rule_to_json(b); }

bool operator==(const RuleSet& a, const RuleSet& b) {
  return serialize_ruleset(a) == serialize_ruleset(b);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Validator {
 public:
  Validator(const SchemaCatalog& catalog, std::vector<Diagnostic>& out)
      : catalog_(catalog), out_(out) {}

  void error(const Rule& r, std::string msg) {
    out_.push_back({Diagnostic::Level::error, r.id, std::move(msg)});
  }
  void warning(const Rule& r, std::string msg) {
    out_.push_back({Diagnostic::Level::warning, r.id, std::move(msg)});
  }

  const ColumnSchema* column(const Rule& r, const EntitySchema& e, const std::string& c) {
    const auto* col = e.column(c);
    if (!col) error(r, "column " + e.name + "." + c + " does not exist");
    return col;
  }

  const ColumnSchema* reference(const Rule& r, const EntityColumn& ec, const char* what) {
    const auto* e = catalog_.find(ec.entity);
    if (!e) {
      error(r, std::string(what) + " entity '" + ec.entity + "' does not exist");
      return nullptr;
    }
    const auto* col = e->column(ec.column);
    if (!col) error(r, std::string(what) + " column " + ec.to_string() + " does not exist");
    return col;
  }

  void boolean_expr(const Rule& r, const EntitySchema& e, const ExprPtr& expr, const char* what) {
    if (!expr) return;
    try {
      ExprType t = check_expr(*expr, [&](std::string_view c) -> std::optional<DataType> {
        if (const auto* col = e.column(c)) return col->type;
        return std::nullopt;
      });
      if (t != ExprType::boolean && t != ExprType::null_type) {
        error(r, std::string(what) + " must be boolean, got " + std::string(to_string(t)));
      }
    } catch (const TypeError& ex) {
      error(r, std::string(what) + ": " + ex.what());
    }
  }

  void literals(const Rule& r, const ColumnSchema& col, const std::vector<Value>& values,
                const char* what) {
    for (const auto& v : values) {
      if (!coerce(v, col.type)) {
        error(r, std::string(what) + " " + v.to_string() + " is not a valid " +
                     std::string(to_string(col.type)) + " for column " + col.name);
      }
    }
  }

  static bool comparable(DataType a, DataType b) {
    return a == b || (is_numeric(a) && is_numeric(b));
  }

  void check(const Rule& r) {
    const auto* entity = catalog_.find(r.entity);
    if (!entity) {
      error(r, "entity '" + r.entity + "' does not exist");
      return;
    }
    std::vector<const ColumnSchema*> cols;
    for (const auto& c : r.columns) {
      if (const auto* col = column(r, *entity, c)) cols.push_back(col);
    }
    boolean_expr(r, *entity, r.where, "where");

    switch (r.tag()) {
      case KindTag::syntax:
      case KindTag::format_class: {
        std::vector<const ColumnSchema*> targets = cols;
        if (const auto* f = std::get_if<FormatClassCheck>(&r.kind)) {
          for (const auto& t : f->extra_targets) {
            if (const auto* col = reference(r, t, "extra target")) targets.push_back(col);
          }
        }
        for (const auto* col : targets) {
          if (col->type != DataType::text) {
            warning(r, "pattern applied to non-text column " + col->name +
                           " (matched against its canonical text)");
          }
        }
        break;
      }
      case KindTag::range: {
        const auto& k = std::get<RangeCheck>(r.kind);
        for (const auto* col : cols) {
          if (col->type == DataType::boolean) {
            error(r, "range rule on boolean column " + col->name);
            continue;
          }
          std::vector<Value> bounds;
          if (k.min) bounds.push_back(*k.min);
          if (k.max) bounds.push_back(*k.max);
          literals(r, *col, bounds, "range bound");
        }
        break;
      }
      case KindTag::domain: {
        const auto& k = std::get<DomainCheck>(r.kind);
        if (k.reference) {
          if (const auto* ref = reference(r, *k.reference, "domain reference")) {
            for (const auto* col : cols) {
              if (!comparable(col->type, ref->type)) {
                error(r, "domain reference " + k.reference->to_string() + " has type " +
                             std::string(to_string(ref->type)) + ", column " + col->name +
                             " has " + std::string(to_string(col->type)));
              }
            }
          }
        } else {
          for (const auto* col : cols) literals(r, *col, k.allowed, "domain value");
        }
        break;
      }
      case KindTag::not_null:
        for (const auto* col : cols) {
          if (!col->nullable) {
            warning(r, "column " + col->name + " is declared non-nullable; rule cannot fail");
          }
        }
        break;
      case KindTag::no_default:
        for (const auto* col : cols) {
          literals(r, *col, std::get<NoDefaultCheck>(r.kind).placeholders, "placeholder");
        }
        break;
      case KindTag::unique:
        for (const auto& c : std::get<UniqueCheck>(r.kind).key) column(r, *entity, c);
        break;
      case KindTag::min_count: break;
      case KindTag::foreign_key: {
        const auto& k = std::get<ForeignKeyCheck>(r.kind);
        if (const auto* ref = reference(r, k.referenced, "foreign key target")) {
          for (const auto* col : cols) {
            if (!comparable(col->type, ref->type)) {
              error(r, "foreign key " + col->name + " (" + std::string(to_string(col->type)) +
                           ") cannot reference " + k.referenced.to_string() + " (" +
                           std::string(to_string(ref->type)) + ")");
            }
          }
        }
        break;
      }
      case KindTag::predicate:
        boolean_expr(r, *entity, std::get<PredicateCheck>(r.kind).expr, "predicate");
        break;
      case KindTag::freshness: {
        const auto& k = std::get<FreshnessCheck>(r.kind);
        timestamp_column(r, *entity, k.timestamp_column);
        boolean_expr(r, *entity, k.condition, "freshness condition");
        break;
      }
      case KindTag::frequency:
        timestamp_column(r, *entity, std::get<FrequencyCheck>(r.kind).timestamp_column);
        break;
    }
  }

  void timestamp_column(const Rule& r, const EntitySchema& e, const std::string& c) {
    if (const auto* col = column(r, e, c); col && col->type != DataType::timestamp) {
      error(r, "column " + e.name + "." + c + " must be a timestamp");
    }
  }

 private:
  const SchemaCatalog& catalog_;
  std::vector<Diagnostic>& out_;
};

}  // namespace

std::vector<Diagnostic> validate_ruleset(const RuleSet& rs, const SchemaCatalog& catalog) {
  std::vector<Diagnostic> out;
  Validator v(catalog, out);
  for (const auto& r : rs.rules) v.check(r);
  return out;
}

}  // namespace dq
