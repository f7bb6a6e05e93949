#pragma once

#include <stdexcept>
#include <string>

namespace erosion {

// Bad argument or violated precondition supplied by the caller.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Geometric failure: the domain cannot support the requested construction.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Solver did not converge or produced an inconsistent result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace erosion
