#pragma once

#include <stdexcept>
#include <string>

namespace vngender {

/// Base exception. `code()` is a short machine-readable identifier
/// (e.g. "empty_name") that the HTTP layer passes through to clients.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class EmptyNameError : public Error {
public:
    EmptyNameError() : Error("empty_name", "name is empty after normalization") {}
};

class DataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("invalid_config", message) {}
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& message) : Error("diverged", message) {}
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace vngender
