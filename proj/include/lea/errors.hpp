#pragma once

#include <stdexcept>
#include <string>

namespace lea {

// Bad user-supplied configuration (sizes, ranges, incompatible options).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; message names the offending line.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An API precondition was broken by the caller.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace lea
