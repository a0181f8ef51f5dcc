#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace resbit::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kInternalError = 3,
};

// Runs one invocation. args[0] is the program name. Data goes to `out`,
// diagnostics (one line per error) to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace resbit::cli
