#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kerrparamp {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_config = 2, exit_solver = 3 };

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kerrparamp
