// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace corrnoise {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller passed a non-finite or otherwise malformed value.
struct InvalidArgumentError : Error {
    using Error::Error;
};

/// A noise model violates its invariants (e.g. a weight block is not SPD).
struct ModelInvalidError : Error {
    using Error::Error;
};

/// A Gram or weight matrix is numerically singular.
struct RankDeficiencyError : Error {
    double condition_number;
    RankDeficiencyError(const std::string& msg, double cond)
        : Error(msg + " (condition number " + std::to_string(cond) + ")"),
          condition_number(cond) {}
};

/// Not enough samples to identify the requested model.
struct InsufficientDataError : Error {
    using Error::Error;
};

/// A matrix expected to be SPD failed to factor, even after jitter.
struct ConditioningError : Error {
    using Error::Error;
};

/// The input combination is not supported (e.g. measurement gaps with b >= 1).
struct UnsupportedInputError : Error {
    using Error::Error;
};

/// The optimizer hit its iteration cap; carries the cost trace for diagnosis.
struct NonConvergenceError : Error {
    std::vector<double> cost_trace;
    NonConvergenceError(const std::string& msg, std::vector<double> trace)
        : Error(msg), cost_trace(std::move(trace)) {}
};

/// File or configuration problem.
struct IoError : Error {
    using Error::Error;
};

}  // namespace corrnoise
