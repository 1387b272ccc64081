#pragma once

#include <stdexcept>
#include <string>

namespace kobex {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Point outside the admissible set (outside closure, outside a chart box, ...).
struct DomainError : Error {
    using Error::Error;
};

struct NonSmoothPointError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

// Fit or certificate that cannot be produced from the data (e.g. no admissible nu).
struct FitError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace kobex
