#pragma once

#include <stdexcept>
#include <string>

namespace survhsic {

// Invalid input data: malformed files, out-of-range values, size mismatches.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The data are valid but the requested quantity is undefined for them
// (constant covariate, zero logrank variance, monotone likelihood, ...).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model fitting ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace survhsic
