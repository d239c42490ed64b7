#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prospect::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs `prospect <subcommand> ...`; args exclude the program name.
/// Usage errors return 1, data/runtime errors 2.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace prospect::cli
