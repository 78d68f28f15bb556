#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace unlinking::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kHypothesisFalsified = 3,
  kHypothesisFailed = 4,
  kInternalError = 5,
};

/// Runs one command. args[0] is the program name. Reports go to `out` (or the
/// --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace unlinking::cli
