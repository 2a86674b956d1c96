#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace barylab::cli {

enum ExitCode : int {
  kOk = 0,
  kBadInput = 2,
  kValidationFailure = 3,
  kSolverFailure = 4,
  kBalanceNonConvergence = 5,
  // A cap was exhausted; whatever finished was written with "partial": true.
  kPartial = 6,
};

// Runs one command line (args excludes the program name). Every invocation
// writes exactly one JSON line to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace barylab::cli
