#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rgap {

/// Process exit codes of the rgap tool.
enum ExitCode : int {
  kExitPass = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitGapViolation = 4,
  kExitBoundViolation = 5,
};

/// Runs the command line with explicit streams; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace rgap
