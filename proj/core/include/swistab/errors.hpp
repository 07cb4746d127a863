#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace swistab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes that do not fit together (non-square mode, mismatched vector length, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A scalar argument outside its admissible range (h <= 0, N < 0, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A matrix that was required to be positive definite is not.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// Logarithmic decay fit hit a zero-norm state or too few samples.
class DegenerateFit : public Error {
public:
    using Error::Error;
};

/// A configured resource cap (matrix-set size, enumeration count) was exceeded.
class CapExceeded : public Error {
public:
    CapExceeded(const std::string& what, std::size_t cap)
        : Error(what + " (cap " + std::to_string(cap) + ")"), cap_(cap) {}

    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t cap_;
};

}  // namespace swistab
