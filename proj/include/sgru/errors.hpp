#pragma once

#include <stdexcept>

namespace sgru {

// Shape mismatch between operands (message names both shapes).
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller violated a precondition (bad config, empty input, ...).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; message carries the line number where known.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input data too degraded to build a usable table.
struct DataQualityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite value reached the training loop.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sgru
