#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace expander::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitUnsupported = 2,
  kExitNumerical = 3,
};

/// Runs one command line (without the program name). Output goes to `out`,
/// diagnostics and errors to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace expander::cli
