#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace condexp::cli {

/// Process exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kInfeasible = 1,
    kInvalidInput = 2,
    kCapacity = 3,
    kInconsistentMarginals = 4,
};

/// Runs the command line `args` (without the program name), writing the report
/// to `out` and diagnostics to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace condexp::cli
