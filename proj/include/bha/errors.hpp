#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bha {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class DegenerateFace : public Error {
public:
    using Error::Error;
};

class ZeroMass : public Error {
public:
    using Error::Error;
};

class SingularOperator : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class NonSymmetric : public Error {
public:
    using Error::Error;
};

class Disconnected : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

} // namespace bha
