#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace apil::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRunFailure = 2, kCheckFailure = 3 };

/// Runs the apil_lab command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apil::cli
