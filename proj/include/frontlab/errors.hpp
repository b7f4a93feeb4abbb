#pragma once

#include <stdexcept>
#include <string>

namespace frontlab {

/// Bad or inconsistent configuration (unknown keys, CFL violation,
/// domain-sizing rule). Maps to exit code 2 in the CLI.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Runtime numerical failure (blow-up, NaN, boundary contamination,
/// fit failure). Maps to exit code 3 in the CLI.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace frontlab
