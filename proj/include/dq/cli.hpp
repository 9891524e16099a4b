#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dq {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotEligible = 2;
inline constexpr int kExitInvalid = 3;
inline constexpr int kExitEvalError = 4;
inline constexpr int kExitMismatch = 5;

/// Runs `dq <command> ...`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dq
