#include "dq/synthkit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "dq/error.hpp"
#include "json_locate.hpp"

namespace dq {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Spec documents

namespace {

constexpr std::array<std::string_view, 6> kGeneratorNames{"sequence", "pool",      "pattern",
                                                          "window",   "int_range", "decimal_range"};

Value literal(const json& j) {
  switch (j.type()) {
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return Value(j.get<std::int64_t>());
    case json::value_t::number_float: {
      auto d = Decimal::parse(json(j).dump());
      if (!d) throw ParseError("pool value " + j.dump() + " is not a representable decimal");
      return Value(*d);
    }
    case json::value_t::string: return Value(j.get<std::string>());
    case json::value_t::boolean: return Value(j.get<bool>());
    default: throw ParseError("pool values must be numbers, strings or booleans");
  }
}

json literal_json(const Value& v) {
  if (const auto* i = v.integer()) return *i;
  if (const auto* b = v.boolean()) return *b;
  if (const auto* s = v.text()) return *s;
  return v.to_string();
}

Timestamp timestamp_at(const json& j, const char* what) {
  auto t = j.is_string() ? Timestamp::parse(j.get<std::string>()) : std::nullopt;
  if (!t) throw ParseError(std::string(what) + " must be an RFC 3339 timestamp");
  return *t;
}

Decimal decimal_at(const json& j, const char* what) {
  std::optional<Decimal> d;
  if (j.is_string()) d = Decimal::parse(j.get<std::string>());
  else if (j.is_number_integer()) d = Decimal::from_int(j.get<std::int64_t>());
  else if (j.is_number_float()) d = Decimal::parse(j.dump());
  if (!d) throw ParseError(std::string(what) + " must be a decimal");
  return *d;
}

ColumnGenerator generator_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("column generator must be an object");
  ColumnGenerator g;
  std::string kind = j.at("kind").get<std::string>();
  auto it = std::find(kGeneratorNames.begin(), kGeneratorNames.end(), kind);
  if (it == kGeneratorNames.end()) throw ParseError("unknown generator kind '" + kind + "'");
  g.kind = static_cast<ColumnGenerator::Kind>(it - kGeneratorNames.begin());
  std::set<std::string> allowed{"kind", "null_rate"};
  switch (g.kind) {
    case ColumnGenerator::Kind::sequence:
      allowed.insert({"start", "step", "prefix"});
      g.start = j.value("start", std::int64_t{1});
      g.step = j.value("step", std::int64_t{1});
      g.prefix = j.value("prefix", std::string());
      break;
    case ColumnGenerator::Kind::pool:
      allowed.insert("values");
      for (const auto& v : j.at("values")) g.values.push_back(literal(v));
      if (g.values.empty()) throw ParseError("pool generator needs values");
      break;
    case ColumnGenerator::Kind::pattern:
      allowed.insert("pattern");
      g.pattern = j.at("pattern").get<std::string>();
      try {
        (void)Pattern::compile(g.pattern);
      } catch (const PatternError& e) {
        throw ParseError(std::string("generator pattern: ") + e.what());
      }
      break;
    case ColumnGenerator::Kind::window:
      allowed.insert({"from", "to"});
      g.from = timestamp_at(j.at("from"), "window 'from'");
      g.to = timestamp_at(j.at("to"), "window 'to'");
      if (g.to < g.from) throw ParseError("window 'to' precedes 'from'");
      break;
    case ColumnGenerator::Kind::int_range:
      allowed.insert({"min", "max"});
      g.min = j.at("min").get<std::int64_t>();
      g.max = j.at("max").get<std::int64_t>();
      if (g.max < g.min) throw ParseError("int_range max < min");
      break;
    case ColumnGenerator::Kind::decimal_range:
      allowed.insert({"min", "max", "scale"});
      g.dmin = decimal_at(j.at("min"), "decimal_range 'min'");
      g.dmax = decimal_at(j.at("max"), "decimal_range 'max'");
      g.scale = j.value("scale", 2);
      if (g.dmax < g.dmin) throw ParseError("decimal_range max < min");
      if (g.scale < 0 || g.scale > Decimal::kScaleDigits) throw ParseError("decimal_range scale out of range");
      break;
  }
  g.null_rate = j.value("null_rate", 0.0);
  if (!(g.null_rate >= 0 && g.null_rate <= 1)) throw ParseError("null_rate must be in [0, 1]");
  for (auto k = j.begin(); k != j.end(); ++k) {
    if (!allowed.count(k.key())) throw ParseError("unknown generator key '" + k.key() + "'");
  }
  return g;
}

json generator_to_json(const ColumnGenerator& g) {
  json j = {{"kind", std::string(kGeneratorNames[static_cast<std::size_t>(g.kind)])}};
  switch (g.kind) {
    case ColumnGenerator::Kind::sequence:
      j["start"] = g.start;
      j["step"] = g.step;
      if (!g.prefix.empty()) j["prefix"] = g.prefix;
      break;
    case ColumnGenerator::Kind::pool: {
      json values = json::array();
      for (const auto& v : g.values) values.push_back(literal_json(v));
      j["values"] = values;
      break;
    }
    case ColumnGenerator::Kind::pattern: j["pattern"] = g.pattern; break;
    case ColumnGenerator::Kind::window:
      j["from"] = g.from.to_string();
      j["to"] = g.to.to_string();
      break;
    case ColumnGenerator::Kind::int_range:
      j["min"] = g.min;
      j["max"] = g.max;
      break;
    case ColumnGenerator::Kind::decimal_range:
      j["min"] = g.dmin.to_string();
      j["max"] = g.dmax.to_string();
      j["scale"] = g.scale;
      break;
  }
  if (g.null_rate > 0) j["null_rate"] = g.null_rate;
  return j;
}

}  // namespace

SynthSpec parse_synth_spec(std::string_view document) {
  json doc = detail::parse_json(document);
  try {
    if (!doc.is_object()) throw ParseError("synth spec must be an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (it.key() != "seed" && it.key() != "entities" && it.key() != "plans") {
        throw ParseError("unknown synth spec key '" + it.key() + "'");
      }
    }
    SynthSpec spec;
    spec.seed = doc.at("seed").get<std::uint64_t>();
    if (auto e = doc.find("entities"); e != doc.end()) {
      for (auto it = e->begin(); it != e->end(); ++it) {
        EntityPlan plan;
        plan.rows = it->at("rows").get<std::size_t>();
        if (auto cols = it->find("columns"); cols != it->end()) {
          for (auto c = cols->begin(); c != cols->end(); ++c) {
            plan.columns[c.key()] = generator_from_json(*c);
          }
        }
        spec.entities[it.key()] = std::move(plan);
      }
    }
    if (auto p = doc.find("plans"); p != doc.end()) {
      for (const auto& plan : *p) {
        ViolationPlan v{plan.at("rule_id").get<std::string>(), plan.at("rate").get<double>()};
        if (!(v.rate >= 0 && v.rate <= 1)) {
          throw ParseError("plan for " + v.rule_id + ": rate must be in [0, 1]");
        }
        spec.plans.push_back(std::move(v));
      }
    }
    return spec;
  } catch (const json::exception& e) {
    std::string msg = e.what();
    if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ParseError("invalid synth spec: " + msg, 1, 1);
  } catch (const ParseError& e) {
    if (e.line()) throw;
    throw ParseError(e.message(), 1, 1);
  }
}

json synth_spec_to_json(const SynthSpec& spec) {
  json entities = json::object();
  for (const auto& [name, plan] : spec.entities) {
    json cols = json::object();
    for (const auto& [c, g] : plan.columns) cols[c] = generator_to_json(g);
    entities[name] = {{"rows", plan.rows}, {"columns", cols}};
  }
  json plans = json::array();
  for (const auto& p : spec.plans) plans.push_back({{"rule_id", p.rule_id}, {"rate", p.rate}});
  return {{"seed", spec.seed}, {"entities", entities}, {"plans", plans}};
}

std::string serialize_expected(const ExpectedMeasures& e) {
  json rules = json::object();
  for (const auto& [id, m] : e) rules[id] = {{"A", m.a}, {"B", m.b}};
  return json{{"rules", rules}}.dump(2) + "\n";
}

ExpectedMeasures parse_expected(std::string_view document) {
  json doc = detail::parse_json(document);
  try {
    ExpectedMeasures out;
    const json& rules = doc.at("rules");
    for (auto it = rules.begin(); it != rules.end(); ++it) {
      out[it.key()] = {it->at("A").get<std::uint64_t>(), it->at("B").get<std::uint64_t>()};
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid expected measures: ") + e.what(), 1, 1);
  }
}

std::string Discrepancy::to_string() const {
  auto fmt = [](const std::optional<ExpectedMeasure>& m) {
    return m ? "(A=" + std::to_string(m->a) + ", B=" + std::to_string(m->b) + ")" : std::string("missing");
  };
  return rule_id + ": expected " + fmt(expected) + ", actual " + fmt(actual);
}

std::vector<Discrepancy> expected_vs_actual(const ExpectedMeasures& expected, const MeasureSet& ms) {
  std::vector<Discrepancy> out;
  std::set<std::string> ids;
  for (const auto& [id, m] : expected) ids.insert(id);
  for (const auto& [id, m] : ms.measures) ids.insert(id);
  for (const auto& id : ids) {
    std::optional<ExpectedMeasure> e;
    std::optional<ExpectedMeasure> a;
    if (auto it = expected.find(id); it != expected.end()) e = it->second;
    if (auto it = ms.measures.find(id); it != ms.measures.end()) a = ExpectedMeasure{it->second.a, it->second.b};
    if (e != a) out.push_back({id, e, a});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t sub_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix(seed ^ splitmix(h));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}

  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      std::uint64_t r = g_();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform in [lo, hi].
  __int128 between(__int128 lo, __int128 hi) {
    auto span = static_cast<unsigned __int128>(hi - lo) + 1;
    if (span > std::numeric_limits<std::uint64_t>::max()) return lo + static_cast<__int128>(g_());
    return lo + static_cast<__int128>(below(static_cast<std::uint64_t>(span)));
  }

  bool chance(double p) {
    if (p <= 0) return false;
    if (p >= 1) return true;
    return static_cast<double>(g_() >> 11) * 0x1.0p-53 < p;
  }

  BoundedDraw draw() {
    return [this](std::uint64_t b) { return below(b); };
  }

 private:
  std::mt19937_64 g_;
};

__int128 floor_div(__int128 a, __int128 b) {
  __int128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

__int128 ceil_div(__int128 a, __int128 b) { return -floor_div(-a, b); }

// Indices of k items chosen from n, ascending.
std::vector<std::size_t> choose(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

using ValueSet = std::unordered_set<Value, SameValueHash, SameValueEq>;

// Discrete grid used for range and timestamp generation.
struct Grid {
  DataType type;
  __int128 unit;  // raw units per grid step

  [[nodiscard]] __int128 raw(const Value& v) const {
    if (const auto* i = v.integer()) return *i;
    if (const auto* d = v.decimal()) return d->scaled();
    if (const auto* t = v.timestamp()) return t->micros;
    throw ConflictingPlan("value " + v.to_string() + " is not on a numeric or time scale");
  }
  [[nodiscard]] Value value(__int128 steps) const {
    __int128 r = steps * unit;
    switch (type) {
      case DataType::integer: return Value(static_cast<std::int64_t>(r));
      case DataType::decimal: return Value(Decimal::from_scaled(r));
      default: return Value(Timestamp{static_cast<std::int64_t>(r)});
    }
  }
};

std::optional<Grid> grid_for(DataType t) {
  switch (t) {
    case DataType::integer: return Grid{t, 1};
    case DataType::decimal: return Grid{t, Decimal::kScale / 100};
    case DataType::timestamp: return Grid{t, kMicrosPerSecond};
    default: return std::nullopt;
  }
}

struct RulePlan {
  const Rule* rule = nullptr;
  bool supported = true;
  std::optional<double> rate;  // explicit plan
  std::vector<EntityColumn> claims;
  // Row-scoped: violating flag per item, per claimed target (or per row for
  // row-level kinds, stored in masks[0]).
  std::vector<std::vector<char>> masks;
  bool entity_violation = false;
};

class Generator {
 public:
  Generator(const SynthSpec& spec, const SchemaCatalog& catalog, const RuleSet& rs)
      : spec_(spec), catalog_(catalog), rs_(rs) {}

  SynthOutput run() {
    for (const auto& [name, plan] : spec_.entities) {
      if (!catalog_.find(name)) throw ConflictingPlan("spec names unknown entity '" + name + "'");
    }
    for (const auto& e : catalog_.entities) {
      auto& cols = data_[e.name];
      cols.assign(e.columns.size(), {});
      for (auto& c : cols) c.resize(rows(e.name));
    }
    std::map<std::string, double> rates;
    for (const auto& p : spec_.plans) {
      if (!rs_.find(p.rule_id)) throw ConflictingPlan("plan references unknown rule '" + p.rule_id + "'");
      if (!(p.rate >= 0 && p.rate <= 1)) throw ConflictingPlan("plan rate for " + p.rule_id + " outside [0, 1]");
      if (!rates.emplace(p.rule_id, p.rate).second) {
        throw ConflictingPlan("rule " + p.rule_id + " is planned twice");
      }
    }
    for (const auto& r : rs_.rules) {
      RulePlan plan;
      plan.rule = &r;
      if (auto it = rates.find(r.id); it != rates.end()) plan.rate = it->second;
      plan.supported = !r.where;
      if (const auto* f = std::get_if<FreshnessCheck>(&r.kind); f && f->condition) plan.supported = false;
      if (!plan.supported && plan.rate) {
        throw ConflictingPlan("rule " + r.id + " has a where filter or condition and cannot be planned");
      }
      if (plan.supported) plan.claims = claims_of(r);
      plans_.push_back(std::move(plan));
    }
    for (auto& p : plans_) {
      for (const auto& c : p.claims) {
        auto [it, fresh] = owner_.emplace(c, &p);
        if (!fresh) {
          throw ConflictingPlan("column " + c.to_string() + " is targeted by rules " +
                                it->second->rule->id + " and " + p.rule->id);
        }
      }
    }
    for (auto& p : plans_) {
      if (p.supported) place(p);
    }
    fill_all();

    SynthOutput out;
    for (const auto& e : catalog_.entities) {
      Entity ent;
      ent.schema = e;
      ent.columns = std::move(data_[e.name]);
      ent.row_count = rows(e.name);
      out.entities.push_back(std::move(ent));
    }
    out.expected = std::move(expected_);
    return out;
  }

 private:
  [[nodiscard]] std::size_t rows(const std::string& entity) const {
    auto it = spec_.entities.find(entity);
    return it == spec_.entities.end() ? 0 : it->second.rows;
  }

  const ColumnSchema& schema_of(const EntityColumn& ec) const {
    const auto* e = catalog_.find(ec.entity);
    const auto* c = e ? e->column(ec.column) : nullptr;
    if (!c) throw ConflictingPlan("unknown column " + ec.to_string());
    return *c;
  }

  std::vector<Value>& column(const EntityColumn& ec) {
    const auto* e = catalog_.find(ec.entity);
    auto idx = e ? e->column_index(ec.column) : std::nullopt;
    if (!idx) throw ConflictingPlan("unknown column " + ec.to_string());
    return data_[ec.entity][*idx];
  }

  static std::vector<EntityColumn> claims_of(const Rule& r) {
    switch (r.tag()) {
      case KindTag::unique: {
        std::vector<EntityColumn> out;
        for (const auto& c : std::get<UniqueCheck>(r.kind).key) out.push_back({r.entity, c});
        return out;
      }
      case KindTag::predicate: {
        std::vector<EntityColumn> out;
        for (const auto& c : referenced_columns(*std::get<PredicateCheck>(r.kind).expr)) {
          out.push_back({r.entity, c});
        }
        return out;
      }
      case KindTag::freshness:
        return {{r.entity, std::get<FreshnessCheck>(r.kind).timestamp_column}};
      case KindTag::frequency:
        return {{r.entity, std::get<FrequencyCheck>(r.kind).timestamp_column}};
      case KindTag::min_count: return {};
      default: return rule_targets(r);
    }
  }

  static std::size_t violations(double rate, std::size_t n) {
    return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  }

  // Chooses violating items and records the expected counts.
  void place(RulePlan& p) {
    const Rule& r = *p.rule;
    const double rate = p.rate.value_or(0);
    Rng rng(sub_seed(spec_.seed, "place:" + r.id));
    const std::size_t own_rows = rows(r.entity);
    switch (r.tag()) {
      case KindTag::min_count: {
        std::uint64_t b = own_rows > 0 ? 1 : 0;
        std::uint64_t a = b && static_cast<std::int64_t>(own_rows) >= std::get<MinCountCheck>(r.kind).threshold ? 1 : 0;
        if (p.rate && violations(rate, b) != b - a) {
          throw ConflictingPlan("rule " + r.id + ": row count " + std::to_string(own_rows) +
                                " contradicts the planned rate");
        }
        expected_[r.id] = {a, b};
        return;
      }
      case KindTag::frequency: {
        std::uint64_t b = own_rows > 0 ? 1 : 0;
        bool violate = p.rate ? violations(rate, b) == 1 : own_rows == 1;
        if (own_rows == 1 && !violate) {
          throw ConflictingPlan("rule " + r.id + ": one row cannot satisfy a frequency check");
        }
        p.entity_violation = violate;
        expected_[r.id] = {b && !violate ? 1u : 0u, b};
        return;
      }
      case KindTag::unique:
      case KindTag::predicate:
      case KindTag::freshness: {
        std::size_t k = violations(rate, own_rows);
        if (r.tag() == KindTag::unique && k == 1) {
          throw ConflictingPlan("rule " + r.id + ": a single duplicate row is impossible");
        }
        p.masks.assign(1, std::vector<char>(own_rows, 0));
        for (auto i : choose(own_rows, k, rng)) p.masks[0][i] = 1;
        expected_[r.id] = {own_rows - k, own_rows};
        return;
      }
      default: {
        std::size_t n = 0;
        for (const auto& t : p.claims) n += rows(t.entity);
        std::size_t k = violations(rate, n);
        p.masks.clear();
        for (const auto& t : p.claims) p.masks.emplace_back(rows(t.entity), 0);
        for (auto item : choose(n, k, rng)) {
          std::size_t t = 0;
          while (item >= p.masks[t].size()) item -= p.masks[t++].size();
          p.masks[t][item] = 1;
        }
        if (r.tag() == KindTag::not_null && k > 0) {
          for (std::size_t t = 0; t < p.claims.size(); ++t) {
            bool any = std::find(p.masks[t].begin(), p.masks[t].end(), 1) != p.masks[t].end();
            if (any && !schema_of(p.claims[t]).nullable) {
              throw ConflictingPlan("rule " + r.id + ": null violations planned on non-nullable column " +
                                    p.claims[t].to_string());
            }
          }
        }
        expected_[r.id] = {n - k, n};
        return;
      }
    }
  }

  // -- base values -----------------------------------------------------------

  const ColumnGenerator* generator_for(const EntityColumn& ec) const {
    auto it = spec_.entities.find(ec.entity);
    if (it == spec_.entities.end()) return nullptr;
    auto c = it->second.columns.find(ec.column);
    return c == it->second.columns.end() ? nullptr : &c->second;
  }

  bool sole_key(const EntityColumn& ec) const {
    const auto* e = catalog_.find(ec.entity);
    return e && e->key.size() == 1 && e->key.front() == ec.column;
  }

  Value coerce_to(const Value& v, const ColumnSchema& col, const EntityColumn& ec) const {
    auto c = coerce(v, col.type);
    if (!c) {
      throw ConflictingPlan("value " + v.to_string() + " does not fit column " + ec.to_string() + " (" +
                            std::string(to_string(col.type)) + ")");
    }
    return *c;
  }

  // Non-null value for row `row` of `ec` from its generator or the default.
  Value base_value(const EntityColumn& ec, std::size_t row, Rng& rng) {
    const ColumnSchema& col = schema_of(ec);
    const ColumnGenerator* g = generator_for(ec);
    if (!g) {
      if (sole_key(ec)) {
        auto n = static_cast<std::int64_t>(row) + 1;
        if (col.type == DataType::text) return Value("K" + std::to_string(n));
        if (col.type == DataType::timestamp) {
          return Value(Timestamp{rs_.reference_time.micros - n * kMicrosPerSecond});
        }
        if (col.type != DataType::boolean) return coerce_to(Value(n), col, ec);
      }
      switch (col.type) {
        case DataType::text: return Value("t" + std::to_string(rng.below(1'000'000)));
        case DataType::integer: return Value(static_cast<std::int64_t>(rng.below(1001)));
        case DataType::decimal:
          return Value(Decimal::from_scaled(static_cast<__int128>(rng.below(100'001)) * (Decimal::kScale / 100)));
        case DataType::boolean: return Value(rng.below(2) == 1);
        case DataType::timestamp:
          return Value(Timestamp{rs_.reference_time.micros -
                                 static_cast<std::int64_t>(rng.below(365 * 86'400)) * kMicrosPerSecond});
      }
    }
    switch (g->kind) {
      case ColumnGenerator::Kind::sequence: {
        std::int64_t n = g->start + static_cast<std::int64_t>(row) * g->step;
        if (col.type == DataType::text) return Value(g->prefix + std::to_string(n));
        return coerce_to(Value(n), col, ec);
      }
      case ColumnGenerator::Kind::pool:
        return coerce_to(g->values[rng.below(g->values.size())], col, ec);
      case ColumnGenerator::Kind::pattern: {
        if (col.type != DataType::text) throw ConflictingPlan("pattern generator on non-text column " + ec.to_string());
        auto s = compiled(g->pattern).sample(rng.draw());
        if (!s) throw ConflictingPlan("pattern generator for " + ec.to_string() + " produced no sample");
        return Value(std::move(*s));
      }
      case ColumnGenerator::Kind::window: {
        if (col.type != DataType::timestamp) throw ConflictingPlan("window generator on non-timestamp column " + ec.to_string());
        __int128 lo = ceil_div(g->from.micros, kMicrosPerSecond);
        __int128 hi = floor_div(g->to.micros, kMicrosPerSecond);
        if (hi < lo) return Value(g->from);
        return Value(Timestamp{static_cast<std::int64_t>(rng.between(lo, hi) * kMicrosPerSecond)});
      }
      case ColumnGenerator::Kind::int_range:
        return coerce_to(Value(static_cast<std::int64_t>(rng.between(g->min, g->max))), col, ec);
      case ColumnGenerator::Kind::decimal_range: {
        __int128 unit = 1;
        for (int i = g->scale; i < Decimal::kScaleDigits; ++i) unit *= 10;
        __int128 lo = ceil_div(g->dmin.scaled(), unit);
        __int128 hi = floor_div(g->dmax.scaled(), unit);
        if (hi < lo) return coerce_to(Value(g->dmin), col, ec);
        return coerce_to(Value(Decimal::from_scaled(rng.between(lo, hi) * unit)), col, ec);
      }
    }
    throw ConflictingPlan("unhandled generator");
  }

  const Pattern& compiled(const std::string& source) {
    auto it = patterns_.find(source);
    if (it == patterns_.end()) it = patterns_.emplace(source, Pattern::compile(source)).first;
    return it->second;
  }

  // A value of the column's type outside `taken`.
  Value outside(const ValueSet& taken, const ColumnSchema& col, const EntityColumn& ec, Rng& rng) {
    auto grid = grid_for(col.type);
    if (col.type == DataType::boolean) {
      for (bool b : {false, true}) {
        if (!taken.count(Value(b))) return Value(b);
      }
      throw ConflictingPlan("no boolean value outside the allowed set for " + ec.to_string());
    }
    if (col.type == DataType::text) {
      for (int attempt = 0; attempt < 1000; ++attempt) {
        Value v("~x" + std::to_string(rng.below(1'000'000)));
        if (!taken.count(v)) return v;
      }
      throw ConflictingPlan("cannot find a value outside the allowed set for " + ec.to_string());
    }
    __int128 top = 0;
    bool any = false;
    for (const auto& v : taken) {
      __int128 r = floor_div(grid->raw(v), grid->unit);
      if (!any || r > top) top = r;
      any = true;
    }
    return grid->value(top + 1 + static_cast<__int128>(rng.below(100)));
  }

  // -- filling ---------------------------------------------------------------

  void fill_all() {
    // Tasks: each supported rule with claims, and each unclaimed column.
    struct Task {
      RulePlan* plan = nullptr;
      EntityColumn column;
    };
    std::vector<Task> pending;
    for (auto& p : plans_) {
      if (p.supported && !p.claims.empty()) pending.push_back({&p, {}});
    }
    for (const auto& e : catalog_.entities) {
      for (const auto& c : e.columns) {
        EntityColumn ec{e.name, c.name};
        if (!owner_.count(ec)) pending.push_back({nullptr, ec});
      }
    }
    std::set<EntityColumn> done;
    while (!pending.empty()) {
      bool progress = false;
      for (auto it = pending.begin(); it != pending.end();) {
        std::vector<EntityColumn> deps = it->plan ? dependencies(*it->plan->rule) : std::vector<EntityColumn>{};
        bool ready = std::all_of(deps.begin(), deps.end(), [&](const EntityColumn& d) { return done.count(d) > 0; });
        if (!ready) {
          ++it;
          continue;
        }
        if (it->plan) {
          fill_rule(*it->plan);
          for (const auto& c : it->plan->claims) done.insert(c);
        } else {
          fill_unclaimed(it->column);
          done.insert(it->column);
        }
        it = pending.erase(it);
        progress = true;
      }
      if (!progress) throw ConflictingPlan("cyclic column references between rules");
    }
  }

  static std::vector<EntityColumn> dependencies(const Rule& r) {
    if (const auto* fk = std::get_if<ForeignKeyCheck>(&r.kind)) return {fk->referenced};
    if (const auto* d = std::get_if<DomainCheck>(&r.kind); d && d->reference) return {*d->reference};
    return {};
  }

  void fill_unclaimed(const EntityColumn& ec) {
    Rng rng(sub_seed(spec_.seed, "col:" + ec.to_string()));
    const ColumnSchema& col = schema_of(ec);
    const ColumnGenerator* g = generator_for(ec);
    double null_rate = g ? g->null_rate : 0;
    if (null_rate > 0 && !col.nullable) {
      throw ConflictingPlan("null_rate set on non-nullable column " + ec.to_string());
    }
    auto& values = column(ec);
    for (std::size_t r = 0; r < values.size(); ++r) {
      values[r] = rng.chance(null_rate) ? Value() : base_value(ec, r, rng);
    }
  }

  void fill_rule(RulePlan& p) {
    const Rule& r = *p.rule;
    Rng rng(sub_seed(spec_.seed, "rule:" + r.id));
    switch (r.tag()) {
      case KindTag::unique: return fill_unique(p, rng);
      case KindTag::predicate: return fill_predicate(p, rng);
      case KindTag::freshness: return fill_freshness(p, rng);
      case KindTag::frequency: return fill_frequency(p, rng);
      default: break;
    }
    for (std::size_t t = 0; t < p.claims.size(); ++t) {
      const EntityColumn& ec = p.claims[t];
      const ColumnSchema& col = schema_of(ec);
      auto& values = column(ec);
      auto cell = cell_maker(r, ec, col);
      for (std::size_t row = 0; row < values.size(); ++row) {
        values[row] = cell(row, p.masks[t][row] != 0, rng);
      }
    }
  }

  using CellFn = std::function<Value(std::size_t row, bool violate, Rng& rng)>;

  CellFn cell_maker(const Rule& r, const EntityColumn& ec, const ColumnSchema& col) {
    switch (r.tag()) {
      case KindTag::syntax:
      case KindTag::format_class: {
        if (col.type != DataType::text) {
          throw ConflictingPlan("rule " + r.id + ": generator supports pattern rules on text columns only");
        }
        const Pattern& pat = r.tag() == KindTag::syntax ? std::get<SyntaxCheck>(r.kind).pattern
                                                       : std::get<FormatClassCheck>(r.kind).pattern;
        return [this, &pat, id = r.id](std::size_t, bool violate, Rng& rng) {
          auto s = pat.sample(rng.draw());
          if (!s || !pat.full_match(*s)) throw ConflictingPlan("rule " + id + ": pattern cannot be sampled");
          if (!violate) return Value(std::move(*s));
          for (const std::string& cand : {*s + "~", "~" + *s, std::string("~"), std::string("#!"), std::string()}) {
            if (!pat.full_match(cand)) return Value(cand);
          }
          throw ConflictingPlan("rule " + id + ": pattern accepts every probe, cannot violate");
        };
      }
      case KindTag::range: {
        auto grid = grid_for(col.type);
        if (!grid) throw ConflictingPlan("rule " + r.id + ": range generation needs a numeric or timestamp column");
        const auto& k = std::get<RangeCheck>(r.kind);
        std::optional<__int128> lo;
        std::optional<__int128> hi;
        if (k.min) {
          __int128 raw = grid->raw(coerce_to(*k.min, col, ec));
          lo = ceil_div(raw, grid->unit);
          if (!k.min_inclusive && *lo * grid->unit == raw) ++*lo;
        }
        if (k.max) {
          __int128 raw = grid->raw(coerce_to(*k.max, col, ec));
          hi = floor_div(raw, grid->unit);
          if (!k.max_inclusive && *hi * grid->unit == raw) --*hi;
        }
        __int128 glo = lo ? *lo : *hi - 1000;
        __int128 ghi = hi ? *hi : *lo + 1000;
        return [=, id = r.id](std::size_t, bool violate, Rng& rng) {
          if (!violate) {
            if (ghi < glo) throw ConflictingPlan("rule " + id + ": empty range");
            return grid->value(rng.between(glo, ghi));
          }
          bool below = lo && (!hi || rng.below(2) == 0);
          auto off = static_cast<__int128>(1 + rng.below(100));
          return grid->value(below ? *lo - off : *hi + off);
        };
      }
      case KindTag::domain:
      case KindTag::foreign_key: {
        std::vector<Value> allowed;
        ValueSet set;
        auto add = [&](const Value& v) {
          if (v.is_null()) return;
          auto c = coerce(v, col.type);
          if (c && set.insert(*c).second) allowed.push_back(*c);
        };
        const EntityColumn* ref = nullptr;
        if (const auto* fk = std::get_if<ForeignKeyCheck>(&r.kind)) ref = &fk->referenced;
        const auto& d = std::get_if<DomainCheck>(&r.kind);
        if (d && d->reference) ref = &*d->reference;
        if (ref) {
          for (const auto& v : column(*ref)) add(v);
        } else {
          for (const auto& v : d->allowed) add(v);
        }
        return [this, allowed = std::move(allowed), set = std::move(set), ec, &col, id = r.id](
                   std::size_t, bool violate, Rng& rng) {
          if (violate) return outside(set, col, ec, rng);
          if (allowed.empty()) throw ConflictingPlan("rule " + id + ": no allowed value to draw from");
          return allowed[rng.below(allowed.size())];
        };
      }
      case KindTag::not_null:
        return [this, ec](std::size_t row, bool violate, Rng& rng) {
          return violate ? Value() : base_value(ec, row, rng);
        };
      case KindTag::no_default: {
        std::vector<Value> placeholders;
        ValueSet set;
        for (const auto& v : std::get<NoDefaultCheck>(r.kind).placeholders) {
          if (auto c = coerce(v, col.type); c && set.insert(*c).second) placeholders.push_back(*c);
        }
        return [this, placeholders = std::move(placeholders), set = std::move(set), ec, id = r.id](
                   std::size_t row, bool violate, Rng& rng) {
          if (violate) {
            if (placeholders.empty()) throw ConflictingPlan("rule " + id + ": no placeholder fits the column");
            return placeholders[rng.below(placeholders.size())];
          }
          for (int attempt = 0; attempt < 1000; ++attempt) {
            Value v = base_value(ec, row, rng);
            if (!set.count(v)) return v;
          }
          throw ConflictingPlan("rule " + id + ": generator only yields placeholders");
        };
      }
      default: throw ConflictingPlan("rule " + r.id + ": kind not supported by the generator");
    }
  }

  void fill_unique(RulePlan& p, Rng& rng) {
    const Rule& r = *p.rule;
    const auto& mask = p.masks[0];
    const std::size_t n = mask.size();
    const EntityColumn& first = p.claims.front();
    const ColumnSchema& col = schema_of(first);
    auto& lead = column(first);
    ValueSet seen;
    for (std::size_t row = 0; row < n; ++row) {
      Value v;
      if (generator_for(first)) {
        int attempt = 0;
        do {
          v = base_value(first, row, rng);
        } while (seen.count(v) && ++attempt < 1000);
        if (seen.count(v)) throw ConflictingPlan("rule " + r.id + ": generator cannot produce distinct keys");
      } else {
        auto i = static_cast<std::int64_t>(row) + 1;
        switch (col.type) {
          case DataType::text: v = Value("U" + std::to_string(i)); break;
          case DataType::timestamp: v = Value(Timestamp{rs_.reference_time.micros - i * kMicrosPerSecond}); break;
          case DataType::boolean:
            if (n > 2) throw ConflictingPlan("rule " + r.id + ": boolean key cannot be unique over many rows");
            v = Value(row == 1);
            break;
          default: v = coerce_to(Value(i), col, first);
        }
      }
      seen.insert(v);
      lead[row] = std::move(v);
    }
    for (std::size_t c = 1; c < p.claims.size(); ++c) {
      auto& values = column(p.claims[c]);
      for (std::size_t row = 0; row < n; ++row) values[row] = base_value(p.claims[c], row, rng);
    }
    std::vector<std::size_t> dup;
    for (std::size_t row = 0; row < n; ++row) {
      if (mask[row]) dup.push_back(row);
    }
    // Pairs, with a final triple when the count is odd.
    for (std::size_t g = 0; g + 1 < dup.size();) {
      std::size_t size = (dup.size() - g == 3) ? 3 : 2;
      for (std::size_t m = 1; m < size; ++m) {
        for (const auto& ec : p.claims) {
          auto& values = column(ec);
          values[dup[g + m]] = values[dup[g]];
        }
      }
      g += size;
    }
  }

  void fill_predicate(RulePlan& p, Rng& rng) {
    const Rule& r = *p.rule;
    const auto& expr = std::get<PredicateCheck>(r.kind).expr;
    std::vector<std::vector<Value>> scratch(p.claims.size(), std::vector<Value>(1));
    std::map<std::string, std::size_t, std::less<>> position;
    for (std::size_t i = 0; i < p.claims.size(); ++i) position[p.claims[i].column] = i;
    BoundExpr bound(expr, [&](std::string_view c) -> std::optional<std::size_t> {
      auto it = position.find(c);
      if (it == position.end()) return std::nullopt;
      return it->second;
    });
    EvalContext ctx{rs_.reference_time};
    const auto& mask = p.masks[0];
    for (std::size_t row = 0; row < mask.size(); ++row) {
      bool want = !mask[row];
      bool found = false;
      for (int attempt = 0; attempt < 5000 && !found; ++attempt) {
        for (std::size_t i = 0; i < p.claims.size(); ++i) scratch[i][0] = base_value(p.claims[i], row, rng);
        found = bound.holds(RowRef{&scratch, 0}, ctx) == want;
      }
      if (!found) {
        throw ConflictingPlan("rule " + r.id + ": column generators cannot make the predicate " +
                              (want ? "hold" : "fail"));
      }
      for (std::size_t i = 0; i < p.claims.size(); ++i) column(p.claims[i])[row] = scratch[i][0];
    }
  }

  void fill_freshness(RulePlan& p, Rng& rng) {
    const auto& k = std::get<FreshnessCheck>(p.rule->kind);
    if (schema_of(p.claims[0]).type != DataType::timestamp) {
      throw ConflictingPlan("rule " + p.rule->id + ": freshness column is not a timestamp");
    }
    auto& values = column(p.claims[0]);
    const std::int64_t ref = rs_.reference_time.micros;
    const auto max_seconds = static_cast<std::uint64_t>(k.max_age_micros / kMicrosPerSecond);
    for (std::size_t row = 0; row < values.size(); ++row) {
      std::int64_t age = 0;
      if (p.masks[0][row]) {
        age = k.max_age_micros + static_cast<std::int64_t>(1 + rng.below(86'400)) * kMicrosPerSecond;
      } else {
        age = static_cast<std::int64_t>(rng.below(max_seconds + 1)) * kMicrosPerSecond;
      }
      values[row] = Value(Timestamp{ref - age});
    }
  }

  void fill_frequency(RulePlan& p, Rng&) {
    const auto& k = std::get<FrequencyCheck>(p.rule->kind);
    if (schema_of(p.claims[0]).type != DataType::timestamp) {
      throw ConflictingPlan("rule " + p.rule->id + ": frequency column is not a timestamp");
    }
    auto& values = column(p.claims[0]);
    const std::size_t n = values.size();
    std::int64_t step = k.max_gap_micros >= 2 * kMicrosPerSecond
                            ? (k.max_gap_micros / 2 / kMicrosPerSecond) * kMicrosPerSecond
                            : k.max_gap_micros;
    std::int64_t t = rs_.reference_time.micros;
    for (std::size_t i = n; i-- > 0;) {
      values[i] = Value(Timestamp{t});
      bool wide = p.entity_violation && i == n / 2;
      t -= wide ? k.max_gap_micros + kMicrosPerSecond : step;
    }
  }

  const SynthSpec& spec_;
  const SchemaCatalog& catalog_;
  const RuleSet& rs_;
  std::map<std::string, std::vector<std::vector<Value>>> data_;
  std::vector<RulePlan> plans_;
  std::map<EntityColumn, RulePlan*> owner_;
  std::map<std::string, Pattern> patterns_;
  ExpectedMeasures expected_;
};

}  // namespace

SynthOutput generate(const SynthSpec& spec, const SchemaCatalog& catalog, const RuleSet& rs) {
  return Generator(spec, catalog, rs).run();
}

void write_synth_output(const std::filesystem::path& dir, const SynthOutput& out) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& e : out.entities) write_file(dir / (e.name() + ".csv"), write_entity_csv(e));
  write_file(dir / "expected_measures.json", serialize_expected(out.expected));
}

}  // namespace dq
