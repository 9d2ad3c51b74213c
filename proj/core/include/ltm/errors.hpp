#pragma once

#include <stdexcept>
#include <string>

#include "ltm/geometry.hpp"

namespace ltm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad parameters or violated preconditions (maps to CLI exit code 3).
struct ValidationError : Error {
    using Error::Error;
};

/// Point on or outside the open domain rectangle (logarithmic singularity).
struct DomainError : ValidationError {
    using ValidationError::ValidationError;
};

/// Numerical machinery failed: no bracket, step underflow, lost resolution
/// (maps to CLI exit code 4).
struct NumericError : Error {
    using Error::Error;
};

struct IntegrationError : NumericError {
    IntegrationError(const std::string& what, double t, Vec2 state)
        : NumericError(what), last_time(t), last_state(state) {}
    double last_time;
    Vec2 last_state;
};

struct TimeoutError : NumericError {
    using NumericError::NumericError;
};

struct AngleUndefinedError : NumericError {
    using NumericError::NumericError;
};

struct DepthExceededError : NumericError {
    using NumericError::NumericError;
};

/// A certificate did not hold (maps to CLI exit code 2).
struct CertificateError : Error {
    using Error::Error;
};

struct NotLinkedError : CertificateError {
    using CertificateError::CertificateError;
};

struct DegeneracyError : CertificateError {
    using CertificateError::CertificateError;
};

}  // namespace ltm
