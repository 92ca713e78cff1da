#pragma once

#include <stdexcept>
#include <string>

namespace mqsbt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: configuration, dimensions, violated preconditions. CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Solver breakdown, singular factorization, failed internal consistency. CLI exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public NumericalError {
public:
    SingularMatrixError(const std::string& what, long pivot)
        : NumericalError(what), pivot_(pivot) {}
    long pivot() const { return pivot_; }

private:
    long pivot_;
};

}  // namespace mqsbt
