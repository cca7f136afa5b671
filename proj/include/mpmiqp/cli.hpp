#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mpmiqp {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitUsage = 2,
  kExitSizeGuard = 3,
  kExitNumerical = 4,
};

// Runs `mpmiqp <args...>` (args excludes the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// min(hardware threads, MPMIQP_THREADS when set), at least 1.
unsigned default_threads();

}  // namespace mpmiqp
