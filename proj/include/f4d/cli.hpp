#pragma once

#include <string>
#include <vector>

namespace f4d::cli {

/// Runs one CLI invocation (argv without the program name) and returns the
/// process exit code: 0 success, 2 usage error, 3 input validation error,
/// 4 numerical failure.
int run(const std::vector<std::string>& args);

} // namespace f4d::cli
