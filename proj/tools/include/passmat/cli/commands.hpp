#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace passmat::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kPrecondition = 3,
  kNumerical = 4,
};

/// Runs the command line `args` (args[0] is the program name). Primary output
/// goes to the -o file when given, otherwise to `out`; summaries and errors go
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace passmat::cli
