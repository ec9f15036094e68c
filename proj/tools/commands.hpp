#pragma once

#include <string>
#include <vector>

namespace cst::cli {

// Runs one CLI invocation; argv excludes the program name.
// Exit codes: 0 ok, 2 config error, 3 data error, 4 verification failure.
int run_cli(const std::vector<std::string>& argv);

}  // namespace cst::cli
