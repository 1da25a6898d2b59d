#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace panocalib::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Runs one `panocalib` invocation. args[0] is the program name. Errors are
/// reported on `err` as a single `error: <Class>: <message>` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace panocalib::cli
