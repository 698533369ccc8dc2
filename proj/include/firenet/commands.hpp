#pragma once

#include <string>
#include <vector>

namespace firenet {

// Runs one CLI invocation (args exclude the program name). Writes artifacts
// per the subcommand, echoes the effective seed for randomized commands,
// and returns the process exit status. Errors are reported as one-line
// JSON on stderr with a stable `error` code:
//   2 parse/validation, 3 convergence, 4 infeasible inputs, 1 other
//   library errors, 64 usage, 70 internal.
int run_command(const std::vector<std::string>& args);

}  // namespace firenet
