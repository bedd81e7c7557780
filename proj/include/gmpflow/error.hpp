#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gmpflow {

enum class ErrorKind { Validation, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Bad input: schema breaches, broken invariants of a data type.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

// A computation could not be carried out (singular system, no convergence, ...).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

// Errors that carry the offending index (pivot, leading minor, block, ...).
class IndexedError : public NumericalError {
public:
    IndexedError(const std::string& what, std::size_t index)
        : NumericalError(what + " (index " + std::to_string(index) + ")"), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace gmpflow
