#include "dq/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dq/digest.hpp"
#include "dq/error.hpp"
#include "parallel.hpp"

namespace dq {

std::size_t Entity::column_index(std::string_view column) const {
  auto i = schema.column_index(column);
  if (!i) throw UnknownColumn("unknown column " + schema.name + "." + std::string(column));
  return *i;
}

std::vector<Value> Entity::key_of(std::size_t ordinal) const {
  std::vector<Value> out;
  out.reserve(schema.key.size());
  for (const auto& k : schema.key) out.push_back(columns[column_index(k)][ordinal]);
  return out;
}

const std::vector<std::size_t>* ColumnIndex::find(const Value& v) const {
  if (v.is_null()) return nullptr;
  auto it = map_.find(v);
  return it == map_.end() ? nullptr : &it->second;
}

ColumnIndex index_column(const Entity& e, std::string_view column) {
  const auto& values = e.column(column);
  ColumnIndex::Map map;
  for (std::size_t r = 0; r < values.size(); ++r) {
    if (!values[r].is_null()) map[values[r]].push_back(r);
  }
  return ColumnIndex(std::move(map));
}

namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

// RFC 4180 reader that remembers whether each field was quoted.
class CsvReader {
 public:
  explicit CsvReader(std::string_view text) : s_(text) {
    if (s_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  [[nodiscard]] bool done() const { return pos_ >= s_.size(); }
  [[nodiscard]] std::size_t line() const { return line_; }

  // Reads one record; returns false at end of input.
  bool next(std::vector<Field>& out, std::string& error) {
    out.clear();
    if (done()) return false;
    while (true) {
      Field f;
      if (pos_ < s_.size() && s_[pos_] == '"') {
        f.quoted = true;
        ++pos_;
        while (true) {
          if (pos_ >= s_.size()) {
            error = "unterminated quoted field";
            return true;
          }
          char c = s_[pos_++];
          if (c == '"') {
            if (pos_ < s_.size() && s_[pos_] == '"') {
              f.text.push_back('"');
              ++pos_;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line_;
            f.text.push_back(c);
          }
        }
        if (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '\n' && s_[pos_] != '\r') {
          error = "unexpected character after closing quote";
          return true;
        }
      } else {
        std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '\n' && s_[pos_] != '\r') {
          if (s_[pos_] == '"') {
            error = "quote inside unquoted field";
            return true;
          }
          ++pos_;
        }
        f.text.assign(s_.substr(start, pos_ - start));
      }
      out.push_back(std::move(f));
      if (pos_ >= s_.size()) return true;
      char c = s_[pos_];
      if (c == ',') {
        ++pos_;
        continue;
      }
      if (c == '\r') ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '\n') ++pos_;
      ++line_;
      return true;
    }
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

bool needs_quotes(const std::string& s) {
  if (s.empty() || s == "\\N") return true;
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

void append_quoted(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

Entity parse_entity_csv(std::string_view text, const EntitySchema& schema) {
  Entity e;
  e.schema = schema;
  const std::size_t ncols = schema.columns.size();
  e.columns.assign(ncols, {});
  CsvReader reader(text);
  std::vector<Field> fields;
  std::string error;
  if (!reader.next(fields, error)) {
    throw LoadError(schema.name, 0, "", "missing header");
  }
  if (!error.empty()) throw LoadError(schema.name, 0, "", "header: " + error);
  if (fields.size() != ncols) {
    throw LoadError(schema.name, 0, "",
                    "header has " + std::to_string(fields.size()) + " fields, schema has " +
                        std::to_string(ncols));
  }
  for (std::size_t c = 0; c < ncols; ++c) {
    if (fields[c].text != schema.columns[c].name) {
      throw LoadError(schema.name, 0, schema.columns[c].name,
                      "header field '" + fields[c].text + "' does not match schema column");
    }
  }
  std::size_t row = 0;
  while (reader.next(fields, error)) {
    if (!error.empty()) throw LoadError(schema.name, row, "", error);
    // A lone trailing blank line is not a record.
    if (fields.size() == 1 && !fields[0].quoted && fields[0].text.empty() && ncols != 1 &&
        reader.done()) {
      break;
    }
    if (fields.size() != ncols) {
      throw LoadError(schema.name, row, "",
                      "expected " + std::to_string(ncols) + " fields, found " +
                          std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      const auto& col = schema.columns[c];
      const Field& f = fields[c];
      bool is_null = !f.quoted && (f.text.empty() || f.text == "\\N");
      if (is_null) {
        if (!col.nullable) throw LoadError(schema.name, row, col.name, "null in non-nullable column");
        e.columns[c].emplace_back();
        continue;
      }
      auto v = parse_cell(f.text, col.type);
      if (!v) {
        throw LoadError(schema.name, row, col.name,
                        "cannot parse '" + f.text + "' as " + std::string(to_string(col.type)));
      }
      e.columns[c].push_back(std::move(*v));
    }
    ++row;
  }
  e.row_count = row;
  return e;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("error writing " + path.string());
}

Entity load_entity(const std::filesystem::path& path, const EntitySchema& schema) {
  return parse_entity_csv(read_file(path), schema);
}

std::string write_entity_csv(const Entity& e) {
  std::string out;
  const std::size_t ncols = e.columns.size();
  for (std::size_t c = 0; c < ncols; ++c) {
    if (c) out.push_back(',');
    const auto& name = e.schema.columns[c].name;
    if (needs_quotes(name)) append_quoted(out, name);
    else out += name;
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < e.row_count; ++r) {
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c) out.push_back(',');
      const Value& v = e.columns[c][r];
      if (v.is_null()) continue;
      if (const auto* s = v.text()) {
        if (needs_quotes(*s)) append_quoted(out, *s);
        else out += *s;
      } else {
        out += v.to_string();
      }
    }
    out.push_back('\n');
  }
  return out;
}

const Entity* Repository::find(std::string_view name) const {
  for (const auto& e : entities) {
    if (e.name() == name) return &e;
  }
  return nullptr;
}

std::string snapshot_fingerprint(
    const std::vector<std::pair<std::string, std::string>>& name_and_bytes) {
  std::vector<std::pair<std::string, std::string>> digests;
  digests.reserve(name_and_bytes.size());
  for (const auto& [name, bytes] : name_and_bytes) digests.emplace_back(name, sha256_hex(bytes));
  std::sort(digests.begin(), digests.end());
  std::string acc;
  for (const auto& [name, digest] : digests) {
    acc += name;
    acc.push_back('\n');
    acc += digest;
    acc.push_back('\n');
  }
  return sha256_hex(acc);
}

Repository load_snapshot(const std::filesystem::path& dir, const SchemaCatalog& catalog,
                         unsigned jobs) {
  const std::size_t n = catalog.entities.size();
  std::vector<Entity> entities(n);
  std::vector<std::pair<std::string, std::string>> files(n);
  detail::parallel_for(n, jobs, [&](std::size_t i) {
    const auto& schema = catalog.entities[i];
    auto path = dir / (schema.name + ".csv");
    std::string bytes = read_file(path);
    entities[i] = parse_entity_csv(bytes, schema);
    files[i] = {schema.name, std::move(bytes)};
  });
  Repository repo;
  repo.catalog = catalog;
  repo.entities = std::move(entities);
  repo.fingerprint = snapshot_fingerprint(files);
  return repo;
}

Repository make_repository(SchemaCatalog catalog, std::vector<Entity> entities) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : entities) files.emplace_back(e.name(), write_entity_csv(e));
  Repository repo;
  repo.catalog = std::move(catalog);
  repo.entities = std::move(entities);
  repo.fingerprint = snapshot_fingerprint(files);
  return repo;
}

}  // namespace dq
