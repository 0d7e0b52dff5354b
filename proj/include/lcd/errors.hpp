#pragma once

#include <stdexcept>
#include <string>

namespace lcd {

// Precondition violated by an argument (negative time, bad parameter, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Result not representable in double precision.
struct RangeError : std::range_error {
    using std::range_error::range_error;
};

// Numerical procedure did not reach its tolerance.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite integrand or wave-function sample; the message carries coordinates.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace lcd
