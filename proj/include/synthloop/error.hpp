#pragma once

#include <stdexcept>
#include <string>

namespace synthloop {

// Exceptions thrown by the library. The CLI maps each family onto an exit
// code: ConfigError -> 1, DataError (and subclasses) -> 2, BackendError -> 3.

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file (JSON or CSV syntax, non-numeric cells, wrong header).
class ParseError : public DataError {
public:
    using DataError::DataError;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public DataError {
public:
    using DataError::DataError;
};

enum class BackendErrorKind { transport, authentication, backend_reported };

class BackendError : public std::runtime_error {
public:
    BackendError(BackendErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    BackendErrorKind kind() const noexcept { return kind_; }

private:
    BackendErrorKind kind_;
};

}  // namespace synthloop
