#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace robustkkt {

enum ExitCode : int { kAffirmative = 0, kNegative = 1, kInconclusive = 2, kUsageError = 3 };

/// Parses args (without the program name), runs one subcommand and writes the
/// JSON report to `out`. Diagnostics and help for usage errors go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robustkkt
