#pragma once

// Byte offsets of JSON values, for error messages. nlohmann::json does not
// keep source positions, so this scans the text structurally.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dq/error.hpp"

namespace dq::detail {

/// 1-based (line, column) of a byte offset.
std::pair<std::size_t, std::size_t> line_col(std::string_view doc, std::size_t offset);

/// Offsets of the elements of the array stored under `key` in the top-level
/// object. Empty if the key is absent or not an array.
std::vector<std::size_t> array_element_offsets(std::string_view doc, std::string_view key);

/// Parses a JSON document, turning syntax errors into ParseError with location.
nlohmann::json parse_json(std::string_view doc);

[[noreturn]] void fail_at(std::string_view doc, std::size_t offset, const std::string& message);

}  // namespace dq::detail
