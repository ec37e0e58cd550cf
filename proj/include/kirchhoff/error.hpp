#pragma once

#include <stdexcept>
#include <string>

namespace kirchhoff {

// Usage-side failures map to exit code 2, numerical ones to exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual bool usage() const { return false; }
};

struct ConfigError : Error {
    using Error::Error;
    bool usage() const override { return true; }
};

struct UsageError : Error {
    using Error::Error;
    bool usage() const override { return true; }
};

struct DomainError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };
struct AccuracyError : Error { using Error::Error; };
struct ResolutionError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };

} // namespace kirchhoff
