#pragma once

#include <stdexcept>
#include <string>

namespace optomech {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A physical parameter is outside its allowed domain.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// The mirror left (-L0, L0), or a mode index N + k <= 0 was requested.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Caller broke a documented precondition (wrong velocity sign, empty grid, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// An iterative numerical procedure failed to converge or ran away.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration input. Carries the offending key and line (0 if unknown).
class ConfigError : public Error {
public:
    ConfigError(const std::string& message, std::string key, int line)
        : Error(message), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

} // namespace optomech
