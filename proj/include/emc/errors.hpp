#pragma once

#include <stdexcept>
#include <string>

namespace emc {

/// Bad caller input: dimension mismatch, point outside domain, invalid range.
struct InputError : std::invalid_argument {
    explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Requested scheme cannot produce the requested functional.
struct UnsupportedSchemeError : std::logic_error {
    explicit UnsupportedSchemeError(const std::string& msg) : std::logic_error(msg) {}
};

/// Integrand exceeded the configured bound along a path.
struct UnboundedIntegrandError : std::runtime_error {
    explicit UnboundedIntegrandError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Rejection sampling could not find interior points.
struct DegenerateDomainError : std::runtime_error {
    explicit DegenerateDomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A closed-form identity failed an internal consistency assertion.
struct InternalConsistencyError : std::logic_error {
    explicit InternalConsistencyError(const std::string& msg) : std::logic_error(msg) {}
};

/// Bad run configuration (missing field, wrong type, schema violation).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace emc
