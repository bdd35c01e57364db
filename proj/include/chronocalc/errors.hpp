#pragma once

#include <stdexcept>
#include <string>

namespace chronocalc {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: wrong dimensions, out-of-range indices, malformed documents.
/// The CLI maps this family to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Failure of a numerical procedure on valid input. CLI exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class TimeWindowError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// An observable ran out of derivative orders (each lift consumes one).
class DefectExhaustedError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IndexError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class PlannerPreconditionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Integration produced a non-finite or runaway state.
class BlowUpError : public NumericalError {
public:
    BlowUpError(const std::string& what, long step, double time, int segment = -1)
        : NumericalError(what), step_(step), time_(time), segment_(segment) {}

    long step() const noexcept { return step_; }
    double time() const noexcept { return time_; }
    /// Index of the failing segment of a composed program, -1 for a single flow.
    int segment() const noexcept { return segment_; }

private:
    long step_;
    double time_;
    int segment_;
};

} // namespace chronocalc
