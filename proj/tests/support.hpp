#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <atomic>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "dq/catalog.hpp"
#include "dq/dataset.hpp"
#include "dq/engine.hpp"
#include "dq/ruleset.hpp"

namespace dq::test {

using nlohmann::json;

inline constexpr const char* kReferenceTime = "2024-01-01T00:00:00Z";

inline RuleSet rules_from(const json& rules, const json& format_classes = json::object()) {
  json doc = {{"name", "fixture"},
              {"version", "1"},
              {"reference_time", kReferenceTime},
              {"format_classes", format_classes},
              {"rules", rules}};
  return parse_ruleset(doc.dump());
}

inline SchemaCatalog catalog_from(const json& entities) {
  return load_catalog(json{{"entities", entities}}.dump());
}

inline Repository repo_from(const SchemaCatalog& catalog, const std::map<std::string, std::string>& csv) {
  std::vector<Entity> entities;
  for (const auto& schema : catalog.entities) {
    auto it = csv.find(schema.name);
    std::string text = it == csv.end() ? "" : it->second;
    if (text.empty()) {
      for (std::size_t i = 0; i < schema.columns.size(); ++i) text += (i ? "," : "") + schema.columns[i].name;
      text += "\n";
    }
    entities.push_back(parse_entity_csv(text, schema));
  }
  return make_repository(catalog, std::move(entities));
}

// Person/warning fixture used by several suites.
inline SchemaCatalog person_catalog() {
  return catalog_from(json::array({
      {{"name", "person"},
       {"columns", {{{"name", "id"}, {"type", "text"}, {"nullable", false}},
                    {{"name", "ipaddress"}, {"type", "text"}}}},
       {"key", {"id"}}},
      {{"name", "warning"},
       {"columns", {{{"name", "wid"}, {"type", "integer"}, {"nullable", false}},
                    {{"name", "type"}, {"type", "text"}}}},
       {"key", {"wid"}}},
  }));
}

inline std::map<std::string, std::string> person_csv() {
  return {{"person", "id,ipaddress\n12345678A,10.0.0.1\n87654321Z,10.0.0.2\n1234,10.0.0.3\n11111111B,10.0.0.4\n"},
          {"warning", "wid,type\n1,HR\n2,HR\n3,IT GENERAL\n4,SUPERCOMPUTATION\n5,HR2\n"}};
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("dq_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace dq::test
