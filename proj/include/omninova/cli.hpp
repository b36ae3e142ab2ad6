#pragma once

#include <string>
#include <vector>

namespace omninova {

// Command-line entry point. Exit codes: 0 when the workflow terminated via
// "__end__", 1 on configuration errors, 2 on workflow errors. Diagnostics go
// to stderr; the final user-facing message goes to stdout.
int run_cli(const std::vector<std::string>& args);

}  // namespace omninova
