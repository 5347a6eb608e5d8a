#pragma once

#include <stdexcept>
#include <string>

namespace f4d {

/// Bad command line or unusable invocation (exit code 2).
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid inputs: dimension mismatches, malformed files, bad config values
/// (exit code 3).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values detected where finite data is required (exit code 4).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace f4d
