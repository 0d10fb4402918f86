#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jicgsim::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitCalibration = 3,
  kExitIo = 4,
  kExitNotFound = 5,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jicgsim::cli
