#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynembed {

// Base for every error raised by the library. The CLI maps
// PreconditionError/ParseError to exit code 2 and NumericalError to 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller violated an operation's input contract (bad shape, wrong graph kind, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A computation produced a result that violates a numerical invariant
// (PSD violation, non-finite state, missing stationary distribution, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace dynembed
