#pragma once

#include <stdexcept>
#include <string>

namespace rageval {

// Base type for all harness errors. Subclasses map to CLI exit codes:
// validation/parse/config -> 2, coverage -> 3, transport/protocol -> 4.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (bad JSON line, missing required field).
struct parse_error : error {
    using error::error;
};

// Violated data invariant or operation precondition.
struct validation_error : error {
    using error::error;
};

// Missing cells in a score table, or mixing incompatible runs.
struct coverage_error : error {
    using error::error;
};

// Endpoint unreachable after bounded retries, or persistent HTTP failure.
struct transport_error : error {
    using error::error;
};

// Endpoint reachable but the response violates the wire contract.
struct protocol_error : error {
    using error::error;
};

// Bad or inconsistent configuration value.
struct config_error : error {
    using error::error;
};

} // namespace rageval
