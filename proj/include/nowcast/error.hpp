#pragma once

#include <stdexcept>
#include <string>

namespace nowcast {

// Failure classes map one-to-one onto CLI diagnostics and exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class SeparationError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

class SingularInformationError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

class InfeasibleAlignmentError : public Error {
public:
    using Error::Error;
};

} // namespace nowcast
