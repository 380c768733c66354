#pragma once

#include <string>
#include <vector>

namespace kscore {

/// Command-line entry point. Exit codes: 0 ok, 1 property failure,
/// 2 usage/config error, 3 numerical abort.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace kscore
