#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hopart::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParseError = 2,
  kNoSolution = 3,
  kBudgetExhausted = 4,
  kViolations = 5,
};

/// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hopart::cli
