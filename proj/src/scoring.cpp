#include "dq/scoring.hpp"

#include <cmath>

#include "dq/error.hpp"
#include "json_locate.hpp"

namespace dq {

using nlohmann::json;

bool LevelThresholds::valid() const {
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!(bounds[i] > 0 && bounds[i] < 100)) return false;
    if (i > 0 && !(bounds[i - 1] < bounds[i])) return false;
  }
  return true;
}

int value_to_level(double v, const LevelThresholds& t) {
  if (!(v >= 0 && v <= 100)) throw OutOfRange("quality value " + std::to_string(v) + " outside [0, 100]");
  int level = 1;
  for (double b : t.bounds) {
    if (v >= b) ++level;
  }
  return level;
}

std::string_view to_string(Aggregation a) { return a == Aggregation::micro ? "micro" : "macro"; }

PropertyValue property_value(std::span<const RuleMeasure* const> measures, Aggregation mode) {
  PropertyValue out;
  out.rule_count = measures.size();
  if (measures.empty()) return out;
  PropertyId p = measures.front()->property;
  long double ratio_sum = 0;
  for (const RuleMeasure* m : measures) {
    if (m->property != p) {
      throw MixedProperty("measures span " + std::string(acronym(p)) + " and " +
                          std::string(acronym(m->property)));
    }
    if (m->b == 0) continue;
    ++out.applicable_rules;
    out.sum_a += m->a;
    out.sum_b += m->b;
    ratio_sum += static_cast<long double>(m->a) / static_cast<long double>(m->b);
  }
  if (out.sum_b == 0) return out;
  if (mode == Aggregation::micro) {
    out.value = 100.0 * static_cast<double>(out.sum_a) / static_cast<double>(out.sum_b);
  } else {
    out.value = static_cast<double>(100.0L * ratio_sum / static_cast<long double>(out.applicable_rules));
  }
  return out;
}

Profile make_profile(std::span<const int> levels) {
  Profile p{};
  for (int l : levels) {
    if (l < 1 || l > 5) throw OutOfRange("property level " + std::to_string(l) + " outside 1..5");
    ++p[static_cast<std::size_t>(l - 1)];
  }
  return p;
}

ProfilingTable ProfilingTable::example() {
  ProfilingTable t;
  t.caps[1] = {3, 3, 3, 3};
  t.caps[2] = {2, 3, 3, 3};
  t.caps[3] = {0, 1, 2, 3};
  t.caps[4] = {0, 0, 0, 3};
  t.caps[5] = {0, 0, 0, 0};
  return t;
}

ProfilingTable ProfilingTable::scaled(std::size_t n) {
  ProfilingTable t = example();
  for (std::size_t r = 1; r < t.caps.size(); ++r) {
    for (auto& cap : t.caps[r]) {
      if (*cap == 3) cap = n;
      cap = std::min(*cap, n);
    }
  }
  return t;
}

bool ProfilingTable::valid() const {
  for (const auto& cap : caps[0]) {
    if (cap) return false;
  }
  for (std::size_t r = 2; r < caps.size(); ++r) {
    for (std::size_t l = 0; l < 4; ++l) {
      const auto& prev = caps[r - 1][l];
      const auto& cur = caps[r][l];
      if (!prev && !cur) continue;
      if (!cur && prev) return false;
      if (prev && *cur > *prev) return false;
    }
  }
  return true;
}

int profile_to_level(const Profile& p, const ProfilingTable& table) {
  for (int r = 5; r >= 1; --r) {
    std::size_t cumulative = 0;
    bool ok = true;
    for (std::size_t l = 0; l < 4 && ok; ++l) {
      cumulative += p[l];
      const auto& cap = table.caps[static_cast<std::size_t>(r)][l];
      if (cap && cumulative > *cap) ok = false;
    }
    if (ok) return r;
  }
  return 0;
}

std::string_view to_string(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::eligible: return "eligible";
    case Verdict::Status::not_eligible: return "not_eligible";
    case Verdict::Status::not_evaluated: return "not_evaluated";
  }
  return "not_evaluated";
}

Verdict certification_eligibility(std::span<const CharacteristicResult> results) {
  Verdict v;
  bool any = false;
  for (const auto& r : results) {
    if (!r.level) continue;
    any = true;
    if (*r.level < kCertificationLevel) v.reasons.emplace_back(r.characteristic, *r.level);
  }
  if (!any) throw NothingEvaluated("no characteristic was evaluated");
  v.status = v.reasons.empty() ? Verdict::Status::eligible : Verdict::Status::not_eligible;
  return v;
}

const ProfilingTable* ScoringConfig::profile_for(CharacteristicId c) const {
  auto it = profiles.find(c);
  return it == profiles.end() ? nullptr : &it->second;
}

namespace {

ProfilingTable table_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 6) {
    throw ParseError("profile for " + name + " must be a 6x4 array");
  }
  ProfilingTable t;
  for (std::size_t r = 0; r < 6; ++r) {
    if (!j[r].is_array() || j[r].size() != 4) {
      throw ParseError("profile for " + name + " must be a 6x4 array");
    }
    for (std::size_t l = 0; l < 4; ++l) {
      const json& cap = j[r][l];
      if (cap.is_null()) continue;
      if (!cap.is_number_integer() || cap.get<std::int64_t>() < 0) {
        throw ParseError("profile caps for " + name + " must be non-negative integers or null");
      }
      t.caps[r][l] = cap.get<std::size_t>();
    }
  }
  if (!t.valid()) {
    throw ParseError("profile for " + name +
                     " must have an unbounded range 0 and caps non-increasing by range");
  }
  return t;
}

json table_to_json(const ProfilingTable& t) {
  json rows = json::array();
  for (const auto& row : t.caps) {
    json r = json::array();
    for (const auto& cap : row) r.push_back(cap ? json(*cap) : json());
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

ScoringConfig scoring_config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  ScoringConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "thresholds") {
      if (!it->is_array() || it->size() != 4) throw ParseError("'thresholds' must be 4 numbers");
      for (std::size_t i = 0; i < 4; ++i) {
        if (!(*it)[i].is_number()) throw ParseError("'thresholds' must be 4 numbers");
        c.thresholds.bounds[i] = (*it)[i].get<double>();
      }
      if (!c.thresholds.valid()) {
        throw ParseError("'thresholds' must be strictly increasing and within (0, 100)");
      }
    } else if (key == "profiles") {
      if (!it->is_object()) throw ParseError("'profiles' must be an object");
      for (auto p = it->begin(); p != it->end(); ++p) {
        auto ch = characteristic_from_name(p.key());
        if (!ch) throw ParseError("unknown characteristic '" + p.key() + "' in profiles");
        c.profiles[*ch] = table_from_json(*p, p.key());
      }
    } else if (key == "aggregation") {
      std::string mode = it->is_string() ? it->get<std::string>() : "";
      if (mode == "micro") c.aggregation = Aggregation::micro;
      else if (mode == "macro") c.aggregation = Aggregation::macro;
      else throw ParseError("'aggregation' must be \"micro\" or \"macro\"");
    } else {
      throw ParseError("unknown config key '" + key + "'");
    }
  }
  return c;
}

ScoringConfig parse_scoring_config(std::string_view document) {
  json doc = detail::parse_json(document);
  try {
    return scoring_config_from_json(doc);
  } catch (const ParseError& e) {
    if (e.line() != 0) throw;
    throw ParseError(e.message(), 1, 1);
  }
}

json scoring_config_to_json(const ScoringConfig& c) {
  json profiles = json::object();
  for (const auto& [ch, t] : c.profiles) profiles[std::string(name(ch))] = table_to_json(t);
  return {{"thresholds", c.thresholds.bounds},
          {"profiles", profiles},
          {"aggregation", std::string(to_string(c.aggregation))}};
}

ScoreResult score_all(const MeasureSet& ms, const RuleSet& rs, const ScoringConfig& config) {
  ScoreResult out;
  auto groups = rules_by_property(rs);
  std::map<CharacteristicId, std::vector<const PropertyScore*>> by_char;
  out.properties.reserve(groups.size());
  for (const auto& [prop, rules] : groups) {
    std::vector<const RuleMeasure*> measures;
    for (const Rule* r : rules) {
      auto it = ms.measures.find(r->id);
      if (it == ms.measures.end()) throw ScoringError("no measure for rule " + r->id);
      measures.push_back(&it->second);
    }
    PropertyValue pv = property_value(measures, config.aggregation);
    PropertyScore s;
    s.property = prop;
    s.value = pv.value;
    s.sum_a = pv.sum_a;
    s.sum_b = pv.sum_b;
    s.rule_count = pv.rule_count;
    if (s.value) s.level = value_to_level(*s.value, config.thresholds);
    out.properties.push_back(s);
  }
  std::sort(out.properties.begin(), out.properties.end(),
            [](const PropertyScore& a, const PropertyScore& b) {
              return index_of(a.property) < index_of(b.property);
            });
  for (const auto& s : out.properties) by_char[characteristic_of(s.property)].push_back(&s);

  for (const auto& [ch, scores] : by_char) {
    CharacteristicResult cr;
    cr.characteristic = ch;
    std::vector<int> levels;
    for (const PropertyScore* s : scores) {
      if (!s->level) continue;
      levels.push_back(*s->level);
      if (*s->level >= kStrengthLevel) cr.strengths.push_back(s->property);
      if (*s->level <= kWeaknessLevel) cr.weaknesses.push_back(s->property);
    }
    cr.profile = make_profile(levels);
    if (!levels.empty()) {
      const ProfilingTable* table = config.profile_for(ch);
      ProfilingTable fallback;
      if (!table) {
        fallback = ProfilingTable::scaled(levels.size());
        table = &fallback;
      }
      cr.level = profile_to_level(cr.profile, *table);
    }
    out.characteristics.push_back(std::move(cr));
  }
  try {
    out.verdict = certification_eligibility(out.characteristics);
  } catch (const NothingEvaluated&) {
    out.verdict = Verdict{};
  }
  return out;
}

}  // namespace dq
