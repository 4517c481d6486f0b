#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rfmp::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailed = 1,
  kHypothesisViolation = 2,  // C1 = 0 for the requested lambda
  kInvalidInput = 3,         // parse, validation or usage error
  kNumericalAbort = 4,
};

/// Entry point behind the `rfmp` executable. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace rfmp::cli
