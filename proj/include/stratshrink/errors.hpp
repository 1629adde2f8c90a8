#pragma once

#include <stdexcept>
#include <string>

namespace stratshrink {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CapabilityError : std::logic_error {
    using std::logic_error::logic_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Carries the best tail bound reached before giving up.
struct TruncationError : NumericError {
    double achieved_bound;
    TruncationError(const std::string& what, double bound)
        : NumericError(what), achieved_bound(bound) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace stratshrink
