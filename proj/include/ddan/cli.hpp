#pragma once

#include <string>
#include <vector>

namespace ddan {

// Entry point behind tools/ddan.cpp; exposed so tests can drive subcommands
// in-process. Returns the process exit code.
int cli_main(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace ddan
