#pragma once

#include <stdexcept>
#include <string>

namespace rrmar {

// Thrown when the regressor Gram matrix of the stacked VAR is (numerically)
// rank deficient, so no unique least-squares initialization exists.
struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when gradient descent blows past 1e6x the initial loss.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when the simulator cannot produce a stationary draw.
struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a requested pivot row leads a singular pivot block.
struct PivotError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or incomplete input data (CSV ingestion).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid command-line / config-file input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rrmar
