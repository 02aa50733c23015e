#pragma once

#include <ostream>

namespace depagg {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitInputError = 2 };

/// Entry point for `depagg <fit|predict|evaluate|simulate|reproduce> ...`.
/// Normal output goes to `out`, diagnostics and traces to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace depagg
