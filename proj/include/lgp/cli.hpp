#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lgp::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2, kRemote = 3 };

// Entry point shared by the `lgp` binary and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lgp::cli
