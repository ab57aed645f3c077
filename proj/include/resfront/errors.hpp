#pragma once

#include <stdexcept>
#include <string>

namespace resfront {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the range where a function is defined or trusted.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// User-supplied data (initial profiles, tables, configs) is malformed.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An iterative method failed: no bracket, step-size collapse, non-finite state.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace resfront
