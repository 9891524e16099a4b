#include <array>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "dq/error.hpp"
#include "dq/synthkit.hpp"

namespace dq {

using nlohmann::json;

namespace {

struct Layout {
  std::string name;
  std::vector<std::string> entities;
  std::size_t rows = 0;
  std::array<std::size_t, kCharacteristicCount> rule_counts{};
};

const std::vector<std::string> kTravelEntities{
    "bookings", "customers", "flights",  "hotels",  "rooms",   "payments",    "agencies",
    "routes",   "airports",  "carriers", "invoices", "reviews", "itineraries", "transfers"};

const std::vector<std::string> kSchoolEntities{"students", "teachers",  "courses", "enrollments",
                                               "grades",   "classrooms", "schedules", "guardians",
                                               "attendance", "exams"};

std::vector<std::string> registry_entities() {
  std::vector<std::string> out;
  char buf[16];
  for (int i = 1; i <= 36; ++i) {
    std::snprintf(buf, sizeof buf, "register_%02d", i);
    out.emplace_back(buf);
  }
  return out;
}

Layout layout_for(std::string_view family) {
  if (family == "travel") return {"travel", kTravelEntities, 2000, {89, 78, 91, 54, 63}};
  if (family == "registry") return {"registry", registry_entities(), 1000, {189, 131, 340, 72, 81}};
  if (family == "school") return {"school", kSchoolEntities, 2000, {94, 100, 176, 48, 70}};
  throw Error("unknown scenario family '" + std::string(family) + "'");
}

using Levels = std::map<std::string, int>;  // property acronym -> target level

Levels uniform(int accuracy, int rest) {
  Levels l;
  for (auto p : kAllProperties) {
    l[std::string(acronym(p))] = characteristic_of(p) == CharacteristicId::accuracy ? accuracy : rest;
  }
  return l;
}

Levels targets(std::string_view family, int version) {
  if (family == "travel") {
    Levels l = uniform(version == 1 ? 1 : 5, 5);
    if (version == 1) {
      l["COMP_REG"] = 1;
      l["CONS_FORM"] = 2;
      l["CONS_SEMAN"] = 1;
      l["INT_REF"] = 3;
      l["CONV_ACT"] = 1;
    } else {
      l["COMP_REG"] = 4;
      l["CONS_FORM"] = 4;
      l["CONS_SEMAN"] = 3;
      l["INT_REF"] = 4;
    }
    l["CRED_FUEN"] = 3;
    l["CRED_VAL_DAT"] = 4;
    return l;
  }
  if (family == "registry") {
    Levels l = uniform(version == 1 ? 1 : 5, 5);
    if (version == 1) {
      l["CONS_FORM"] = 1;
      l["CONS_SEMAN"] = 1;
      l["INT_REF"] = 1;
    } else {
      l["CONS_FORM"] = 4;
      l["CONS_SEMAN"] = 3;
      l["INT_REF"] = 4;
    }
    return l;
  }
  return uniform(version == 1 ? 1 : 5, 5);
}

// Violation rate giving a property value inside the target level's band.
double rate_for(int level) {
  switch (level) {
    case 1: return 0.9;
    case 2: return 0.7;
    case 3: return 0.45;
    case 4: return 0.22;
    default: return 0.0;
  }
}

struct ColumnDoc {
  std::string name;
  std::string type;
  bool nullable = true;
};

}  // namespace

std::vector<std::string> scenario_names() {
  return {"travel-v1", "travel-v2", "registry-v1", "registry-v2", "school-v1", "school-v2"};
}

Scenario build_scenario(std::string_view name) {
  auto dash = name.rfind("-v");
  if (dash == std::string_view::npos || (name.substr(dash) != "-v1" && name.substr(dash) != "-v2")) {
    throw Error("unknown scenario '" + std::string(name) + "'");
  }
  std::string_view family = name.substr(0, dash);
  int version = name.back() - '0';
  Layout layout = layout_for(family);
  Levels levels = targets(family, version);
  const std::size_t entity_count = layout.entities.size();

  std::vector<std::vector<ColumnDoc>> columns(entity_count);
  for (auto& c : columns) c.push_back({"id", "integer", false});

  json spec_entities = json::object();
  for (const auto& e : layout.entities) spec_entities[e] = {{"rows", layout.rows}, {"columns", json::object()}};

  json rules = json::array();
  json plans = json::array();
  std::size_t counter = 0;
  for (auto ch : kAllCharacteristics) {
    auto props = properties_of(ch);
    const std::size_t total = layout.rule_counts[index_of(ch)];
    for (std::size_t pi = 0; pi < props.size(); ++pi) {
      const PropertyId prop = props[pi];
      const std::string acr(acronym(prop));
      std::size_t count = total / props.size() + (pi < total % props.size() ? 1 : 0);
      for (std::size_t i = 0; i < count; ++i, ++counter) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "R%04zu", counter + 1);
        const std::string id = buf;
        std::string col = "c" + id.substr(1);
        const std::size_t ei = counter % entity_count;
        const std::string& entity = layout.entities[ei];
        json rule = {{"id", id}, {"entity", entity}, {"property", acr}};
        json params = json::object();
        std::string type = "text";
        bool with_column = true;
        json generator;
        switch (prop) {
          case PropertyId::syntactic_accuracy:
            rule["kind"] = "syntax";
            params["pattern"] = "[A-Z]{3}-[0-9]{4}";
            break;
          case PropertyId::semantic_accuracy:
            rule["kind"] = "domain";
            params["values"] = {"economy", "business", "first", "premium"};
            break;
          case PropertyId::accuracy_range:
            rule["kind"] = "range";
            type = "integer";
            params["min"] = 0;
            params["max"] = 120;
            break;
          case PropertyId::file_completeness:
            rule["kind"] = "min_count";
            params["threshold"] = 100;
            with_column = false;
            break;
          case PropertyId::record_completeness: rule["kind"] = "not_null"; break;
          case PropertyId::data_value_completeness:
            rule["kind"] = "no_default";
            params["placeholders"] = {"N/A", "UNKNOWN"};
            break;
          case PropertyId::false_file_completeness:
          case PropertyId::inconsistency_risk:
            rule["kind"] = "unique";
            type = "integer";
            break;
          case PropertyId::format_consistency:
            rule["kind"] = "format_class";
            params["class"] = "code";
            break;
          case PropertyId::semantic_consistency:
            rule["kind"] = "predicate";
            type = "integer";
            params["expr"] = col + " >= 0";
            generator = {{"kind", "int_range"}, {"min", -1000}, {"max", 999}};
            break;
          case PropertyId::referential_integrity: {
            rule["kind"] = "foreign_key";
            type = "integer";
            params["references"] = layout.entities[(ei + 1) % entity_count] + ".id";
            break;
          }
          case PropertyId::source_credibility:
            rule["kind"] = "predicate";
            params["expr"] = "in_set(" + col + ", 'registry', 'survey', 'partner')";
            generator = {{"kind", "pool"}, {"values", {"registry", "survey", "partner", "scraped"}}};
            break;
          case PropertyId::value_credibility:
            rule["kind"] = "domain";
            params["values"] = {"verified", "audited", "declared"};
            break;
          case PropertyId::timeliness_of_update:
            rule["kind"] = "freshness";
            type = "timestamp";
            params["max_age"] = "30d";
            break;
          case PropertyId::update_frequency:
            rule["kind"] = "frequency";
            type = "timestamp";
            params["max_gap"] = "1d";
            break;
        }
        if (with_column) {
          rule["columns"] = {col};
          columns[ei].push_back({col, type, true});
          if (!generator.is_null()) spec_entities[entity]["columns"][col] = generator;
        }
        rule["params"] = params;
        rules.push_back(rule);
        double rate = rate_for(levels.at(acr));
        if (rate > 0) plans.push_back({{"rule_id", id}, {"rate", rate}});
      }
    }
  }

  json catalog_doc = {{"entities", json::array()}};
  for (std::size_t ei = 0; ei < entity_count; ++ei) {
    json cols = json::array();
    for (const auto& c : columns[ei]) cols.push_back({{"name", c.name}, {"type", c.type}, {"nullable", c.nullable}});
    catalog_doc["entities"].push_back({{"name", layout.entities[ei]}, {"columns", cols}, {"key", {"id"}}});
  }
  json rules_doc = {{"name", layout.name},
                    {"version", "1"},
                    {"reference_time", "2024-06-30T00:00:00Z"},
                    {"format_classes", {{"code", "[A-Z]{2}[0-9]{3}"}}},
                    {"rules", rules}};
  json spec_doc = {{"seed", 20240630 + version}, {"entities", spec_entities}, {"plans", plans}};

  Scenario s;
  s.name = std::string(name);
  s.catalog = load_catalog(catalog_doc.dump());
  s.rules = parse_ruleset(rules_doc.dump());
  s.spec = parse_synth_spec(spec_doc.dump());
  return s;
}

}  // namespace dq
