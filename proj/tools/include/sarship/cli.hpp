#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sarship::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitConfig = 2;

// Entry point of the `sarship` tool. Diagnostics go to `err`, tables to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sarship::cli
