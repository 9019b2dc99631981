#pragma once

#include <string>
#include <vector>

namespace coplan::cli {

// Dispatches one command (plan, simulate, sweep, baseline) given the
// arguments after the program name, and returns the process exit code:
// 0 success, 2 usage, 3 infeasible, 4 configuration or input problem.
int run_command(const std::vector<std::string>& args);

}  // namespace coplan::cli
