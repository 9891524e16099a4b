#pragma once

#include <random>

#include "dq/synthkit.hpp"
#include "support.hpp"

namespace dq::test {

// A one-rule fixture exercising `kind` with random parameters, row counts and
// violation rate.
struct KindCase {
  SchemaCatalog catalog;
  RuleSet rules;
  SynthSpec spec;
};

inline KindCase random_kind_case(KindTag kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::uint64_t n) { return rng() % n; };
  const std::size_t rows = pick(1000) + 1;
  double rate = static_cast<double>(pick(101)) / 100.0;
  bool planned = true;

  std::string type = "text";
  json rule = {{"id", "R"}, {"entity", "e"}, {"columns", {"v"}}};
  json params = json::object();
  json formats = json::object();
  json generator;
  switch (kind) {
    case KindTag::syntax: {
      static const std::vector<std::string> patterns{"[A-Z]{3}-[0-9]{4}", "\\d{8}[A-Z]", "(ab|cd)+x?",
                                                     "[a-z]{2,5}@[a-z]{3}\\.com", "[^~]{1,3}"};
      rule.update({{"property", "EXAC_SINT"}, {"kind", "syntax"}});
      params["pattern"] = patterns[pick(patterns.size())];
      break;
    }
    case KindTag::range: {
      static const std::vector<std::string> types{"integer", "decimal", "timestamp"};
      type = types[pick(3)];
      rule.update({{"property", "RAN_EXAC"}, {"kind", "range"}});
      bool has_min = pick(4) != 0;
      bool has_max = !has_min || pick(4) != 0;
      if (type == "timestamp") {
        if (has_min) params["min"] = "2023-01-01T00:00:00Z";
        if (has_max) params["max"] = "2023-12-31T12:30:00.5Z";
      } else if (type == "decimal") {
        if (has_min) params["min"] = -1.25;
        if (has_max) params["max"] = 99.999;
      } else {
        if (has_min) params["min"] = static_cast<int>(pick(50)) - 25;
        if (has_max) params["max"] = 30 + static_cast<int>(pick(50));
      }
      params["min_inclusive"] = pick(2) == 1;
      params["max_inclusive"] = pick(2) == 1;
      break;
    }
    case KindTag::domain: {
      bool numeric = pick(2) == 1;
      type = numeric ? "integer" : "text";
      rule.update({{"property", pick(2) ? "EXAC_SEMAN" : "CRED_VAL_DAT"}, {"kind", "domain"}});
      params["values"] = numeric ? json{1, 2, 3, 5, 8} : json{"red", "green", "blue"};
      break;
    }
    case KindTag::not_null:
      type = pick(2) ? "integer" : "text";
      rule.update({{"property", "COMP_REG"}, {"kind", "not_null"}});
      break;
    case KindTag::no_default:
      rule.update({{"property", "COMP_VAL_ESP"}, {"kind", "no_default"}});
      params["placeholders"] = {"N/A", "-", "UNKNOWN"};
      break;
    case KindTag::unique: {
      type = pick(2) ? "integer" : "text";
      rule.update({{"property", "FAL_COMP_FICH"}, {"kind", "unique"}});
      if (static_cast<std::size_t>(std::llround(rate * static_cast<double>(rows))) == 1) rate = 0;
      break;
    }
    case KindTag::min_count:
      rule.erase("columns");
      rule.update({{"property", "COMP_FICH"}, {"kind", "min_count"}});
      params["threshold"] = pick(1200);
      planned = false;
      break;
    case KindTag::foreign_key:
      type = "integer";
      rule.update({{"property", "INT_REF"}, {"kind", "foreign_key"}});
      params["references"] = "f.code";
      break;
    case KindTag::format_class:
      rule.update({{"property", "CONS_FORM"}, {"kind", "format_class"}});
      params["class"] = "postcode";
      formats["postcode"] = "[0-9]{5}";
      break;
    case KindTag::predicate:
      type = "integer";
      rule.update({{"property", "CONS_SEMAN"}, {"kind", "predicate"}});
      params["expr"] = "v % 3 = 0 or v > " + std::to_string(pick(100));
      generator = {{"kind", "int_range"}, {"min", 0}, {"max", 120}};
      break;
    case KindTag::freshness:
      type = "timestamp";
      rule.update({{"property", "CONV_ACT"}, {"kind", "freshness"}});
      params["max_age"] = std::to_string(1 + pick(90)) + "d";
      break;
    case KindTag::frequency:
      type = "timestamp";
      rule.update({{"property", "FREC_ACT"}, {"kind", "frequency"}});
      params["max_gap"] = std::to_string(2 + pick(48)) + "h";
      rate = rows == 1 ? 1.0 : static_cast<double>(pick(2));
      break;
  }
  rule["params"] = params;
  json catalog = json::array({
      {{"name", "e"},
       {"columns", {{{"name", "id"}, {"type", "integer"}, {"nullable", false}},
                    {{"name", "v"}, {"type", type}, {"nullable", true}},
                    {{"name", "note"}, {"type", "text"}, {"nullable", true}}}},
       {"key", {"id"}}},
      {{"name", "f"}, {"columns", {{{"name", "code"}, {"type", "integer"}, {"nullable", false}}}}, {"key", {"code"}}},
  });
  json spec = {{"seed", seed},
               {"entities",
                {{"e", {{"rows", rows}, {"columns", {{"note", {{"kind", "pattern"}, {"pattern", "[a-z ]{0,12}"}, {"null_rate", 0.2}}}}}}},
                 {"f", {{"rows", 1 + pick(50)}, {"columns", {{"code", {{"kind", "sequence"}, {"start", 100}, {"step", 7}}}}}}}}},
               {"plans", json::array()}};
  if (!generator.is_null()) spec["entities"]["e"]["columns"]["v"] = generator;
  if (planned) spec["plans"].push_back({{"rule_id", "R"}, {"rate", rate}});

  KindCase c;
  c.catalog = catalog_from(catalog);
  c.rules = rules_from(json::array({rule}), formats);
  c.spec = parse_synth_spec(spec.dump());
  return c;
}

inline constexpr std::array<KindTag, kKindCount> kAllKinds{
    KindTag::syntax,      KindTag::range,        KindTag::domain,    KindTag::not_null,
    KindTag::no_default,  KindTag::unique,       KindTag::min_count, KindTag::foreign_key,
    KindTag::format_class, KindTag::predicate,   KindTag::freshness, KindTag::frequency};

}  // namespace dq::test
