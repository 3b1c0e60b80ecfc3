// Command-line front end. Kept as a library so tests can drive it in-process.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bcr::cli {

enum ExitCode : int {
  kOk = 0,
  kMinimizerViolated = 1,
  kBadConfig = 2,
  kIoFailure = 3,
  kImpossibleEvidence = 4,
};

/// Parses `args` (without the program name) and runs the subcommand.
/// "-" as an output path means `out`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace bcr::cli
