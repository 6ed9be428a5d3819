#pragma once

#include <stdexcept>
#include <string>

namespace perfdiag {

// Bad input data: malformed profile files, counter mismatches, degenerate
// sample sets. CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration: unreadable config files, invalid option values,
// unknown keys. CLI maps this to exit code 3.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace perfdiag
