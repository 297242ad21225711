#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace facebench::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 1,
  kRuntimeFailure = 2,
};

/// Runs the command line `args` (args[0] is the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace facebench::cli
