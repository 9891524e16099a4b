#pragma once

#include <string>
#include <string_view>

namespace dq {

/// Lowercase hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);

}  // namespace dq
