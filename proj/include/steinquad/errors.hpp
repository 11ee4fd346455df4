#pragma once

#include <stdexcept>
#include <string>

namespace steinquad {

// Error hierarchy. Numerical failures (degenerate matrices, diverging
// chains, non-finite objectives) derive from NumericalError so the CLI can
// map them to exit code 3; malformed configuration derives from ConfigError
// (exit code 2).

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : NumericalError {
    using NumericalError::NumericalError;
};

struct OutsideSupport : NumericalError {
    using NumericalError::NumericalError;
};

struct NoSampler : NumericalError {
    using NumericalError::NumericalError;
};

struct NonFiniteDensity : NumericalError {
    using NumericalError::NumericalError;
};

struct NonFiniteLoss : NumericalError {
    using NumericalError::NumericalError;
};

struct NonFiniteObjective : NumericalError {
    using NumericalError::NumericalError;
};

struct BudgetExceeded : NumericalError {
    using NumericalError::NumericalError;
};

struct DimensionTooLarge : NumericalError {
    using NumericalError::NumericalError;
};

struct TooFewSamples : NumericalError {
    using NumericalError::NumericalError;
};

struct EmbeddingUnavailable : NumericalError {
    using NumericalError::NumericalError;
};

struct EmptyGrid : NumericalError {
    using NumericalError::NumericalError;
};

struct ZeroReference : NumericalError {
    using NumericalError::NumericalError;
};

struct MaxStepsExceeded : NumericalError {
    using NumericalError::NumericalError;
};

struct StepUnderflow : NumericalError {
    using NumericalError::NumericalError;
};

struct VersionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CorruptPayload : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace steinquad
