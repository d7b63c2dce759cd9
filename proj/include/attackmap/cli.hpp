#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace attackmap::cli {

// Exit codes of `run`.
enum ExitCode : int {
  kOk = 0,
  kUncovered = 1,   // --fail-on-uncovered and an unprotected/unpreventable chain exists
  kInvalid = 2,     // model/scenario validation errors, unknown ids, unreadable input
  kUsage = 3,
};

// args excludes the program name. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace attackmap::cli
