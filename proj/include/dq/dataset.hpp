#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dq/catalog.hpp"
#include "dq/expr.hpp"
#include "dq/value.hpp"

namespace dq {

/// Immutable, column-major table. `columns[c][r]` is the cell of row
/// ordinal r in schema column c.
struct Entity {
  EntitySchema schema;
  std::vector<std::vector<Value>> columns;
  std::size_t row_count = 0;

  [[nodiscard]] const std::string& name() const { return schema.name; }
  /// Throws UnknownColumn.
  [[nodiscard]] std::size_t column_index(std::string_view column) const;
  [[nodiscard]] const std::vector<Value>& column(std::string_view name) const {
    return columns[column_index(name)];
  }
  [[nodiscard]] RowRef row(std::size_t ordinal) const { return RowRef{&columns, ordinal}; }
  /// Key column values of a row (empty when the schema declares no key).
  [[nodiscard]] std::vector<Value> key_of(std::size_t ordinal) const;

  friend bool operator==(const Entity& a, const Entity& b) {
    return a.schema.name == b.schema.name && a.row_count == b.row_count && a.columns == b.columns;
  }
};

/// Exact multimap from non-null values to the ordinals holding them.
/// Integer and Decimal values of equal magnitude share a slot.
class ColumnIndex {
 public:
  using Map = std::unordered_map<Value, std::vector<std::size_t>, SameValueHash, SameValueEq>;

  explicit ColumnIndex(Map map) : map_(std::move(map)) {}

  /// Ascending ordinals, or nullptr when absent.
  [[nodiscard]] const std::vector<std::size_t>* find(const Value& v) const;
  [[nodiscard]] bool contains(const Value& v) const { return find(v) != nullptr; }
  [[nodiscard]] std::size_t distinct() const { return map_.size(); }
  [[nodiscard]] const Map& entries() const { return map_; }

 private:
  Map map_;
};

/// Throws UnknownColumn.
[[nodiscard]] ColumnIndex index_column(const Entity& e, std::string_view column);

/// Parses snapshot CSV text. Throws LoadError.
[[nodiscard]] Entity parse_entity_csv(std::string_view text, const EntitySchema& schema);

/// Throws IoError if the file cannot be read, LoadError on bad content.
[[nodiscard]] Entity load_entity(const std::filesystem::path& path, const EntitySchema& schema);

/// Canonical snapshot CSV: header, LF line ends, Null as an empty field,
/// text quoted only when needed (and always when empty).
[[nodiscard]] std::string write_entity_csv(const Entity& e);

struct Repository {
  SchemaCatalog catalog;
  std::vector<Entity> entities;  // catalog order
  std::string fingerprint;

  [[nodiscard]] const Entity* find(std::string_view name) const;
};

/// Loads `<dir>/<entity>.csv` for every catalog entity. `jobs` > 1 loads
/// entities concurrently.
[[nodiscard]] Repository load_snapshot(const std::filesystem::path& dir, const SchemaCatalog& catalog,
                                       unsigned jobs = 1);

/// Builds a repository from in-memory entities (fingerprint over their
/// canonical CSV).
[[nodiscard]] Repository make_repository(SchemaCatalog catalog, std::vector<Entity> entities);

/// sha256 over sorted entity names, each followed by the sha256 of its file
/// bytes.
[[nodiscard]] std::string snapshot_fingerprint(
    const std::vector<std::pair<std::string, std::string>>& name_and_bytes);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace dq
