#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fmie::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitUnsupported = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitCheckFailure = 5;

/// Entry point of the `fmie` tool; returns the process exit code.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fmie::cli
