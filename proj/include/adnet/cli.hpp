#pragma once

#include <iosfwd>

namespace adnet {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitDiverged = 3 };

/// Entry point of the `adnet` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adnet
