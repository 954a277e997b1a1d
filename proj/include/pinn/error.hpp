#pragma once

#include <stdexcept>
#include <string>

namespace pinn {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or broken precondition (ln of a non-positive value,
/// t outside [0, T], malformed config values, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Config file missing, unreadable or carrying invalid fields.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Divergence, singular systems and other numerical failures.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data files.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace pinn
