#include "json_locate.hpp"

namespace dq::detail {

namespace {

void skip_ws(std::string_view d, std::size_t& i) {
  while (i < d.size() && (d[i] == ' ' || d[i] == '\t' || d[i] == '\n' || d[i] == '\r')) ++i;
}

// Skips a string starting at d[i] == '"'; returns its raw body.
std::string_view skip_string(std::string_view d, std::size_t& i) {
  std::size_t start = ++i;
  while (i < d.size() && d[i] != '"') {
    if (d[i] == '\\') ++i;
    ++i;
  }
  std::string_view body = d.substr(start, i - start);
  if (i < d.size()) ++i;
  return body;
}

// Skips one value of any kind.
void skip_value(std::string_view d, std::size_t& i) {
  skip_ws(d, i);
  if (i >= d.size()) return;
  if (d[i] == '"') {
    skip_string(d, i);
    return;
  }
  if (d[i] == '{' || d[i] == '[') {
    int depth = 0;
    while (i < d.size()) {
      char c = d[i];
      if (c == '"') {
        skip_string(d, i);
        continue;
      }
      if (c == '{' || c == '[') ++depth;
      if (c == '}' || c == ']') {
        --depth;
        if (depth == 0) {
          ++i;
          return;
        }
      }
      ++i;
    }
    return;
  }
  while (i < d.size() && d[i] != ',' && d[i] != '}' && d[i] != ']') ++i;
}

}  // namespace

std::pair<std::size_t, std::size_t> line_col(std::string_view doc, std::size_t offset) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset && i < doc.size(); ++i) {
    if (doc[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::vector<std::size_t> array_element_offsets(std::string_view d, std::string_view key) {
  std::vector<std::size_t> out;
  std::size_t i = 0;
  skip_ws(d, i);
  if (i >= d.size() || d[i] != '{') return out;
  ++i;
  while (i < d.size()) {
    skip_ws(d, i);
    if (i >= d.size() || d[i] != '"') return out;
    std::string_view k = skip_string(d, i);
    skip_ws(d, i);
    if (i >= d.size() || d[i] != ':') return out;
    ++i;
    skip_ws(d, i);
    if (k == key) {
      if (i >= d.size() || d[i] != '[') return out;
      ++i;
      while (true) {
        skip_ws(d, i);
        if (i >= d.size() || d[i] == ']') return out;
        out.push_back(i);
        skip_value(d, i);
        skip_ws(d, i);
        if (i < d.size() && d[i] == ',') ++i;
        else return out;
      }
    }
    skip_value(d, i);
    skip_ws(d, i);
    if (i < d.size() && d[i] == ',') ++i;
    else return out;
  }
  return out;
}

nlohmann::json parse_json(std::string_view doc) {
  try {
    return nlohmann::json::parse(doc.begin(), doc.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, col] = line_col(doc, offset);
    std::string msg = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ParseError("malformed JSON: " + msg, line, col);
  }
}

void fail_at(std::string_view doc, std::size_t offset, const std::string& message) {
  auto [line, col] = line_col(doc, offset);
  throw ParseError(message, line, col);
}

}  // namespace dq::detail
