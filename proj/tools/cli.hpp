#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treerecon::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // verify: a tolerance was breached
  kValidation = 2,
  kNoConvergence = 3,
  kUsage = 64,
};

// Runs one command line (args excludes the program name). `tty` selects the
// default output format of c-of-m, bounds and table1.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool tty);

}  // namespace treerecon::cli
