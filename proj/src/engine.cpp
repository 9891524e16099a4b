#include "dq/engine.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "dq/digest.hpp"
#include "dq/error.hpp"
#include "parallel.hpp"

namespace dq {

bool ref_less(const RecordRef& a, const RecordRef& b) {
  if (a.entity != b.entity) return a.entity < b.entity;
  if (a.ordinal != b.ordinal) return a.ordinal < b.ordinal;
  return a.column < b.column;
}

std::optional<double> RuleMeasure::ratio() const {
  if (b == 0) return std::nullopt;
  return static_cast<double>(a) / static_cast<double>(b);
}

bool RuleMeasure::same_result(const RuleMeasure& o) const {
  return rule_id == o.rule_id && entity == o.entity && property == o.property && kind == o.kind &&
         a == o.a && b == o.b && failing_count == o.failing_count && failing == o.failing;
}

bool MeasureSet::same_result(const MeasureSet& o) const {
  if (snapshot_fingerprint != o.snapshot_fingerprint ||
      ruleset_fingerprint != o.ruleset_fingerprint || measures.size() != o.measures.size()) {
    return false;
  }
  for (const auto& [id, m] : measures) {
    auto it = o.measures.find(id);
    if (it == o.measures.end() || !m.same_result(it->second)) return false;
  }
  return true;
}

std::string ruleset_fingerprint(const RuleSet& rs) { return sha256_hex(serialize_ruleset(rs)); }

namespace {

using IndexMap = std::map<EntityColumn, ColumnIndex>;
using ValueSet = std::unordered_set<Value, SameValueHash, SameValueEq>;

struct Failure {
  const Entity* entity;
  std::size_t ordinal;
  const std::string* column;  // null for row-level
};

const Entity& entity_or_throw(const Repository& repo, const std::string& name) {
  const Entity* e = repo.find(name);
  if (!e) throw UnknownColumn("entity '" + name + "' is not loaded");
  return *e;
}

// Appends a type-tagged, length-prefixed encoding of v; numeric values of
// equal magnitude encode identically.
void encode_key_part(std::string& out, const Value& v) {
  std::string body;
  char tag = 'N';
  if (v.is_null()) {
    tag = '0';
  } else if (auto n = v.numeric()) {
    tag = 'n';
    body = n->to_string();
  } else {
    tag = static_cast<char>('a' + static_cast<int>(*v.type()));
    body = v.to_string();
  }
  out.push_back(tag);
  out += std::to_string(body.size());
  out.push_back(':');
  out += body;
}

class RuleEvaluator {
 public:
  RuleEvaluator(const Rule& rule, const Repository& repo, const RuleSet& rs, const IndexMap* shared)
      : rule_(rule), repo_(repo), ctx_{rs.reference_time}, shared_(shared),
        entity_(entity_or_throw(repo, rule.entity)) {
    if (rule.where) {
      BoundExpr where(rule.where, lookup(entity_));
      mask_.resize(entity_.row_count);
      for (std::size_t r = 0; r < entity_.row_count; ++r) {
        mask_[r] = where.holds(entity_.row(r), ctx_) ? 1 : 0;
      }
    }
  }

  RuleMeasure run() {
    std::visit([this](const auto& k) { eval(k); }, rule_.kind);
    RuleMeasure m;
    m.rule_id = rule_.id;
    m.entity = rule_.entity;
    m.property = rule_.property;
    m.kind = rule_.tag();
    m.a = a_;
    m.b = b_;
    if (is_entity_level(m.kind)) {
      m.failing_count = b_ - a_;
      return m;
    }
    m.failing_count = failures_.size();
    std::sort(failures_.begin(), failures_.end(), [](const Failure& x, const Failure& y) {
      if (x.entity != y.entity && x.entity->name() != y.entity->name()) {
        return x.entity->name() < y.entity->name();
      }
      if (x.ordinal != y.ordinal) return x.ordinal < y.ordinal;
      const std::string empty;
      return (x.column ? *x.column : empty) < (y.column ? *y.column : empty);
    });
    std::size_t keep = std::min(failures_.size(), kFailingCap);
    m.failing.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const Failure& f = failures_[i];
      m.failing.push_back(RecordRef{f.entity->name(), f.ordinal, f.column ? *f.column : std::string(),
                                    f.entity->key_of(f.ordinal)});
    }
    return m;
  }

 private:
  static BoundExpr::ColumnIndexLookup lookup(const Entity& e) {
    return [&e](std::string_view c) { return e.schema.column_index(c); };
  }

  [[nodiscard]] bool in_scope(std::size_t r) const { return mask_.empty() || mask_[r]; }

  // Cell-by-cell scan of one target column. `check` sees non-null values
  // only; null cells fail unless skipped.
  template <class Check>
  void scan_column(const Entity& e, const std::string& column, bool apply_where, Check&& check) {
    const auto& values = e.column(column);
    for (std::size_t r = 0; r < e.row_count; ++r) {
      if (apply_where && !in_scope(r)) continue;
      const Value& v = values[r];
      if (v.is_null() && rule_.skip_null) continue;
      ++b_;
      if (!v.is_null() && check(v)) {
        ++a_;
      } else {
        failures_.push_back({&e, r, &column});
      }
    }
  }

  template <class Check>
  void scan_own_columns(Check&& check) {
    for (const auto& c : rule_.columns) scan_column(entity_, c, true, check);
  }

  const ColumnIndex& index_for(const EntityColumn& ec) {
    if (shared_) {
      auto it = shared_->find(ec);
      if (it != shared_->end()) return it->second;
    }
    local_index_.emplace(index_column(entity_or_throw(repo_, ec.entity), ec.column));
    return *local_index_;
  }

  static bool pattern_match(const Pattern& p, const Value& v) {
    if (const auto* s = v.text()) return p.full_match(*s);
    return p.full_match(v.to_string());
  }

  void eval(const SyntaxCheck& k) {
    scan_own_columns([&](const Value& v) { return pattern_match(k.pattern, v); });
  }

  void eval(const FormatClassCheck& k) {
    auto check = [&](const Value& v) { return pattern_match(k.pattern, v); };
    for (const auto& c : rule_.columns) scan_column(entity_, c, true, check);
    for (const auto& t : k.extra_targets) {
      const Entity& e = entity_or_throw(repo_, t.entity);
      scan_column(e, t.column, &e == &entity_, check);
    }
  }

  void eval(const RangeCheck& k) {
    for (const auto& c : rule_.columns) {
      DataType type = entity_.schema.column(c) ? entity_.schema.column(c)->type : DataType::text;
      std::optional<Value> lo;
      std::optional<Value> hi;
      if (k.min) lo = coerce(*k.min, type);
      if (k.max) hi = coerce(*k.max, type);
      if ((k.min && !lo) || (k.max && !hi)) {
        throw UnknownColumn("range bound not representable in column " + c);
      }
      scan_column(entity_, c, true, [&](const Value& v) {
        if (lo) {
          auto cmp = compare(v, *lo);
          if (!cmp || (k.min_inclusive ? *cmp < 0 : *cmp <= 0)) return false;
        }
        if (hi) {
          auto cmp = compare(v, *hi);
          if (!cmp || (k.max_inclusive ? *cmp > 0 : *cmp >= 0)) return false;
        }
        return true;
      });
    }
  }

  ValueSet coerced_set(const std::vector<Value>& literals, const std::string& column) {
    ValueSet out;
    const auto* col = entity_.schema.column(column);
    for (const auto& lit : literals) {
      if (!col) continue;
      if (auto v = coerce(lit, col->type)) out.insert(std::move(*v));
    }
    return out;
  }

  void eval(const DomainCheck& k) {
    if (k.reference) {
      const ColumnIndex& idx = index_for(*k.reference);
      scan_own_columns([&](const Value& v) { return idx.contains(v); });
      return;
    }
    for (const auto& c : rule_.columns) {
      ValueSet allowed = coerced_set(k.allowed, c);
      scan_column(entity_, c, true, [&](const Value& v) { return allowed.count(v) > 0; });
    }
  }

  void eval(const NotNullCheck&) {
    scan_own_columns([](const Value&) { return true; });
  }

  void eval(const NoDefaultCheck& k) {
    for (const auto& c : rule_.columns) {
      ValueSet placeholders = coerced_set(k.placeholders, c);
      scan_column(entity_, c, true, [&](const Value& v) { return placeholders.count(v) == 0; });
    }
  }

  void eval(const ForeignKeyCheck& k) {
    const ColumnIndex& idx = index_for(k.referenced);
    scan_own_columns([&](const Value& v) { return idx.contains(v); });
  }

  void eval(const UniqueCheck& k) {
    std::vector<std::size_t> cols;
    for (const auto& c : k.key) cols.push_back(entity_.column_index(c));
    std::vector<std::string> keys(entity_.row_count);
    std::vector<char> applicable(entity_.row_count, 0);
    std::unordered_map<std::string, std::uint32_t> counts;
    for (std::size_t r = 0; r < entity_.row_count; ++r) {
      if (!in_scope(r)) continue;
      bool has_null = false;
      std::string key;
      for (auto c : cols) {
        const Value& v = entity_.columns[c][r];
        has_null = has_null || v.is_null();
        encode_key_part(key, v);
      }
      if (has_null && rule_.skip_null) continue;
      applicable[r] = 1;
      ++counts[key];
      keys[r] = std::move(key);
    }
    for (std::size_t r = 0; r < entity_.row_count; ++r) {
      if (!applicable[r]) continue;
      ++b_;
      if (counts[keys[r]] == 1) ++a_;
      else failures_.push_back({&entity_, r, nullptr});
    }
  }

  void eval(const MinCountCheck& k) {
    if (entity_.row_count == 0) return;
    std::size_t rows = 0;
    for (std::size_t r = 0; r < entity_.row_count; ++r) rows += in_scope(r) ? 1 : 0;
    b_ = 1;
    a_ = static_cast<std::int64_t>(rows) >= k.threshold ? 1 : 0;
  }

  void eval(const PredicateCheck& k) {
    BoundExpr expr(k.expr, lookup(entity_));
    std::vector<std::size_t> referenced;
    for (const auto& c : referenced_columns(*k.expr)) referenced.push_back(entity_.column_index(c));
    for (std::size_t r = 0; r < entity_.row_count; ++r) {
      if (!in_scope(r)) continue;
      if (rule_.skip_null &&
          std::any_of(referenced.begin(), referenced.end(),
                      [&](std::size_t c) { return entity_.columns[c][r].is_null(); })) {
        continue;
      }
      ++b_;
      if (expr.holds(entity_.row(r), ctx_)) ++a_;
      else failures_.push_back({&entity_, r, nullptr});
    }
  }

  void eval(const FreshnessCheck& k) {
    const auto& ts = entity_.column(k.timestamp_column);
    std::optional<BoundExpr> condition;
    if (k.condition) condition.emplace(k.condition, lookup(entity_));
    const __int128 ref = ctx_.reference_time.micros;
    for (std::size_t r = 0; r < entity_.row_count; ++r) {
      if (!in_scope(r)) continue;
      if (condition && !condition->holds(entity_.row(r), ctx_)) continue;
      const Timestamp* t = ts[r].timestamp();
      if (!t && rule_.skip_null) continue;
      ++b_;
      if (t && ref - t->micros <= k.max_age_micros) ++a_;
      else failures_.push_back({&entity_, r, &k.timestamp_column});
    }
  }

  void eval(const FrequencyCheck& k) {
    if (entity_.row_count == 0) return;
    b_ = 1;
    const auto& ts = entity_.column(k.timestamp_column);
    std::vector<std::int64_t> stamps;
    for (std::size_t r = 0; r < entity_.row_count; ++r) {
      if (!in_scope(r)) continue;
      if (const Timestamp* t = ts[r].timestamp()) stamps.push_back(t->micros);
    }
    if (stamps.size() < 2) return;
    std::sort(stamps.begin(), stamps.end());
    for (std::size_t i = 1; i < stamps.size(); ++i) {
      if (static_cast<__int128>(stamps[i]) - stamps[i - 1] > k.max_gap_micros) return;
    }
    a_ = 1;
  }

  const Rule& rule_;
  const Repository& repo_;
  EvalContext ctx_;
  const IndexMap* shared_;
  const Entity& entity_;
  std::vector<char> mask_;
  std::optional<ColumnIndex> local_index_;
  std::uint64_t a_ = 0;
  std::uint64_t b_ = 0;
  std::vector<Failure> failures_;
};

RuleMeasure eval_with(const Rule& rule, const Repository& repo, const RuleSet& rs,
                      const IndexMap* shared) {
  auto start = std::chrono::steady_clock::now();
  try {
    RuleEvaluator ev(rule, repo, rs, shared);
    RuleMeasure m = ev.run();
    m.elapsed = std::chrono::steady_clock::now() - start;
    return m;
  } catch (const UnknownColumn& e) {
    throw EvalError("rule " + rule.id + ": " + e.what());
  }
}

std::vector<EntityColumn> referenced_indexes(const RuleSet& rs) {
  std::set<EntityColumn> out;
  for (const auto& r : rs.rules) {
    if (const auto* fk = std::get_if<ForeignKeyCheck>(&r.kind)) out.insert(fk->referenced);
    if (const auto* d = std::get_if<DomainCheck>(&r.kind); d && d->reference) {
      out.insert(*d->reference);
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace

RuleMeasure eval_rule(const Rule& rule, const Repository& repo, const RuleSet& rs) {
  return eval_with(rule, repo, rs, nullptr);
}

MeasureSet eval_all(const RuleSet& rs, const Repository& repo, unsigned jobs) {
  std::vector<std::string> errors;
  IndexMap shared;
  auto wanted = referenced_indexes(rs);
  std::vector<std::optional<ColumnIndex>> built(wanted.size());
  detail::parallel_for(wanted.size(), jobs, [&](std::size_t i) {
    const Entity* e = repo.find(wanted[i].entity);
    if (!e || !e->schema.column(wanted[i].column)) return;
    built[i].emplace(index_column(*e, wanted[i].column));
  });
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    if (built[i]) shared.emplace(wanted[i], std::move(*built[i]));
  }

  const std::size_t n = rs.rules.size();
  std::vector<std::optional<RuleMeasure>> slots(n);
  std::vector<std::string> slot_errors(n);
  detail::parallel_for(n, jobs, [&](std::size_t i) {
    try {
      slots[i] = eval_with(rs.rules[i], repo, rs, &shared);
    } catch (const EvalError& e) {
      slot_errors[i] = e.what();
    }
  });
  for (const auto& e : slot_errors) {
    if (!e.empty()) errors.push_back(e);
  }
  if (!errors.empty()) {
    std::string msg = "evaluation failed for " + std::to_string(errors.size()) + " rule(s)";
    for (const auto& e : errors) msg += "\n  " + e;
    throw EvalError(msg);
  }
  MeasureSet ms;
  ms.snapshot_fingerprint = repo.fingerprint;
  ms.ruleset_fingerprint = ruleset_fingerprint(rs);
  for (auto& slot : slots) {
    std::string id = slot->rule_id;
    ms.measures.emplace(std::move(id), std::move(*slot));
  }
  return ms;
}

}  // namespace dq
