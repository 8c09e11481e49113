// cli.hpp — command-line entry point; exposed as a function so tests can
// drive the commands in-process.
#pragma once

#include <string>
#include <vector>

namespace alphamine {

// argv-style interface (without the program name). Exit codes: 0 success,
// 1 usage/config error, 2 data error, 3 backend error.
int run_cli(const std::vector<std::string>& args);

}  // namespace alphamine
