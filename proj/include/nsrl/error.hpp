#pragma once

#include <stdexcept>
#include <string>

namespace nsrl {

// Base of every error the library raises. The category picks the CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ball or cylinder does not fit the box / slab.
class GeometryError : public Error {
public:
    using Error::Error;
};

// Argument outside the admissible range (p < 1, M <= 0, negative test function, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Time window empty, not covered by the slab, or fewer than two snapshots.
class WindowError : public Error {
public:
    using Error::Error;
};

// Grid or snapshot spacing too coarse for the requested quantity.
class ResolutionError : public Error {
public:
    using Error::Error;
};

// Iterative solve (CG) did not converge within its iteration cap.
class SolverError : public Error {
public:
    using Error::Error;
};

// Time step violates the advective CFL bound.
class StabilityError : public Error {
public:
    using Error::Error;
};

// Non-finite values appeared during integration.
class DivergenceError : public Error {
public:
    using Error::Error;
};

// Ratio requested on a field whose normalising integral vanishes.
class DegenerateFieldError : public Error {
public:
    using Error::Error;
};

// No admissible good slice exists (the Chebyshev precondition failed).
class SelectionError : public Error {
public:
    using Error::Error;
};

// Malformed file, bad magic, checksum mismatch.
class FormatError : public Error {
public:
    using Error::Error;
};

// Unknown or invalid configuration key.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : Error(key + ": " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace nsrl
