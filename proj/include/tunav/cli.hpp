#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tunav {

enum ExitCode { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitInternal = 3 };

/// Entry point of the `tunav` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands directories to their `.tv` files (sorted); plain paths pass through.
std::vector<std::string> expand_inputs(const std::vector<std::string>& paths);

}  // namespace tunav
