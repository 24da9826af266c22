#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qrm::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,     ///< bad flags, config or input files
  kExitNumerical = 2,  ///< singular or failed solve
  kExitInvariant = 3,  ///< `check` violation, or a warning under --strict
};

/// Runs one command line; `args[0]` is the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qrm::cli
