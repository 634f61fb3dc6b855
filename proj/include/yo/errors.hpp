#pragma once

#include <stdexcept>
#include <string>

namespace yo {

/// A precondition of an operation was violated by its caller.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// A configuration (optimizer or experiment) breaks one of its invariants.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Bad argument shape: wrong dimension, too few cities, empty sample.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Statistics requested on data for which they are undefined.
struct DegenerateInput : std::domain_error {
    using std::domain_error::domain_error;
};

struct UnsupportedSpace : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed external file; the message names the offending row.
struct IngestionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace yo
