#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dq/value.hpp"

namespace dq {

struct ColumnSchema {
  std::string name;
  DataType type = DataType::text;
  bool nullable = true;

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

struct EntitySchema {
  std::string name;
  std::vector<ColumnSchema> columns;
  std::vector<std::string> key;  // empty: no declared key

  [[nodiscard]] std::optional<std::size_t> column_index(std::string_view column) const;
  [[nodiscard]] const ColumnSchema* column(std::string_view column) const;

  friend bool operator==(const EntitySchema&, const EntitySchema&) = default;
};

/// Entity names unique; column names unique per entity; key columns exist.
struct SchemaCatalog {
  std::vector<EntitySchema> entities;

  [[nodiscard]] const EntitySchema* find(std::string_view entity) const;

  friend bool operator==(const SchemaCatalog&, const SchemaCatalog&) = default;
};

/// JSON: {"entities": [{"name", "columns": [{"name", "type", "nullable"}], "key"}]}.
/// Throws ParseError.
[[nodiscard]] SchemaCatalog load_catalog(std::string_view document);
[[nodiscard]] std::string serialize_catalog(const SchemaCatalog& catalog);

}  // namespace dq
