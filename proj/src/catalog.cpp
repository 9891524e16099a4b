#include "dq/catalog.hpp"

#include <algorithm>
#include <set>

#include "json_locate.hpp"

namespace dq {

using nlohmann::json;

std::optional<std::size_t> EntitySchema::column_index(std::string_view c) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == c) return i;
  }
  return std::nullopt;
}

const ColumnSchema* EntitySchema::column(std::string_view c) const {
  auto i = column_index(c);
  return i ? &columns[*i] : nullptr;
}

const EntitySchema* SchemaCatalog::find(std::string_view entity) const {
  for (const auto& e : entities) {
    if (e.name == entity) return &e;
  }
  return nullptr;
}

namespace {

std::string require_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(where + ": '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

EntitySchema parse_entity(const json& j) {
  if (!j.is_object()) throw ParseError("entity must be an object");
  EntitySchema e;
  e.name = require_string(j, "name", "entity");
  if (e.name.empty()) throw ParseError("entity name must not be empty");
  std::string where = "entity '" + e.name + "'";
  auto cols = j.find("columns");
  if (cols == j.end() || !cols->is_array()) throw ParseError(where + ": 'columns' must be an array");
  std::set<std::string> seen;
  for (const auto& c : *cols) {
    if (!c.is_object()) throw ParseError(where + ": column must be an object");
    ColumnSchema col;
    col.name = require_string(c, "name", where + " column");
    auto type_text = require_string(c, "type", where + " column '" + col.name + "'");
    auto type = data_type_from_string(type_text);
    if (!type) throw ParseError(where + ": unknown datatype '" + type_text + "'");
    col.type = *type;
    if (auto n = c.find("nullable"); n != c.end()) {
      if (!n->is_boolean()) throw ParseError(where + ": 'nullable' must be a boolean");
      col.nullable = n->get<bool>();
    }
    if (!seen.insert(col.name).second) {
      throw ParseError(where + ": duplicate column '" + col.name + "'");
    }
    e.columns.push_back(std::move(col));
  }
  if (auto k = j.find("key"); k != j.end() && !k->is_null()) {
    if (!k->is_array()) throw ParseError(where + ": 'key' must be an array");
    for (const auto& kc : *k) {
      if (!kc.is_string()) throw ParseError(where + ": key entries must be strings");
      auto name = kc.get<std::string>();
      if (!e.column(name)) throw ParseError(where + ": key column '" + name + "' does not exist");
      if (std::find(e.key.begin(), e.key.end(), name) != e.key.end()) {
        throw ParseError(where + ": key column '" + name + "' listed twice");
      }
      e.key.push_back(std::move(name));
    }
  }
  return e;
}

}  // namespace

SchemaCatalog load_catalog(std::string_view document) {
  json doc = detail::parse_json(document);
  if (!doc.is_object()) throw ParseError("schema catalog must be a JSON object", 1, 1);
  auto ents = doc.find("entities");
  if (ents == doc.end() || !ents->is_array()) {
    throw ParseError("schema catalog needs an 'entities' array", 1, 1);
  }
  auto offsets = detail::array_element_offsets(document, "entities");
  SchemaCatalog catalog;
  std::set<std::string> names;
  for (std::size_t i = 0; i < ents->size(); ++i) {
    std::size_t offset = i < offsets.size() ? offsets[i] : 0;
    try {
      EntitySchema e = parse_entity((*ents)[i]);
      if (!names.insert(e.name).second) throw ParseError("duplicate entity '" + e.name + "'");
      catalog.entities.push_back(std::move(e));
    } catch (const ParseError& e) {
      detail::fail_at(document, offset, e.message());
    }
  }
  return catalog;
}

std::string serialize_catalog(const SchemaCatalog& catalog) {
  json ents = json::array();
  for (const auto& e : catalog.entities) {
    json cols = json::array();
    for (const auto& c : e.columns) {
      cols.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))},
                      {"nullable", c.nullable}});
    }
    json j = {{"name", e.name}, {"columns", cols}};
    if (!e.key.empty()) j["key"] = e.key;
    ents.push_back(std::move(j));
  }
  return json{{"entities", ents}}.dump(2) + "\n";
}

}  // namespace dq
