#pragma once

#include <iosfwd>

namespace teamrep {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitEmpty = 2, kExitNonConvergence = 3 };

/// Entry point of the `teamrep` tool with injectable streams. Log lines go to
/// `err` and are filtered by the TEAMREP_LOG environment variable
/// (quiet | info | debug; default info).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace teamrep
