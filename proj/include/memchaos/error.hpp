#pragma once

#include <stdexcept>
#include <string>

namespace memchaos {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Numerical integration left the admissible state region.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double time)
        : Error(what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// The initialization pulse could not place the circuit on the requested equilibrium.
class InitializationError : public Error {
public:
    using Error::Error;
};

/// Training data cannot support a classifier (e.g. a single class).
class DegenerateData : public Error {
public:
    using Error::Error;
};

/// A readout cannot be realized on a single positive crosspoint column.
class UnsupportedMapping : public Error {
public:
    using Error::Error;
};

class ProgrammingFailure : public Error {
public:
    using Error::Error;
};

/// Config file could not be parsed or failed schema validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace memchaos
