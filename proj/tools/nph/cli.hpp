#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nph::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;

inline constexpr int kSchemaVersion = 1;

// Runs the command line `args` (without the program name). Results go to
// `out`, diagnostics and progress to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nph::cli
