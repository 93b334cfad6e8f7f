#pragma once

#include <stdexcept>
#include <string>

namespace gridopt {

/// Error category, mirrored one-to-one by the C API status codes.
enum class ErrorKind {
    Io,          // file unreadable / unwritable
    Parse,       // malformed input text
    Validation,  // network violates a structural invariant
    Config,      // bad options / parameters
    Numeric,     // linear-algebra failure (singular Jacobian, ...)
    Diverged,    // an operation that requires convergence did not get it
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace gridopt
