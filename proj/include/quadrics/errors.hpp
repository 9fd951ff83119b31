#pragma once

#include <stdexcept>
#include <string>

namespace quadrics {

// Malformed input: shape mismatches, bad config values, unreadable files.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : ValidationError {
    using ValidationError::ValidationError;
};

// A gram sum lost positive-definiteness somewhere the scaling needs it.
struct DegenerateSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A combined power-flow matrix failed the Cholesky test.
struct DefinitenessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Oracle asked to certify an instance above its size limit.
struct RefusalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SamplingAnomalyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EstimationFailedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace quadrics
