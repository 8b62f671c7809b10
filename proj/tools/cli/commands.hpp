#pragma once

#include <iostream>

namespace vup::cli {

/// Entry point of the `vup` executable. Returns the process exit code:
/// 0 success, 1 runtime failure, 2 invalid configuration or usage. Failures
/// print a single line starting with "error:" to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace vup::cli
