#pragma once

#include <stdexcept>
#include <string>

namespace paw {

/// Raised when a model configuration violates one of the model assumptions
/// or the config file itself is malformed.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an iterative scheme fails to converge or a solver detects
/// an instability (non-monotone solution, inverted bracket, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace paw
