#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ifbs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

// Parses argv and dispatches to a subcommand. Never throws.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ifbs::cli
