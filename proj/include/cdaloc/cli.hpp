#pragma once

#include <string>
#include <vector>

namespace cdaloc {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Entry point of the `cdaloc` tool. `args` excludes the program name.
/// Subcommands: simulate, locate, fuse, fbp, sweep, rs-report, replay.
int run_cli(const std::vector<std::string>& args);

const char* toolkit_version();

}  // namespace cdaloc
