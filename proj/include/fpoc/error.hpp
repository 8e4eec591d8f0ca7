#pragma once

#include <stdexcept>
#include <string>

namespace fpoc {

/// Raised when a caller violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by the numerical solvers: non-convergence, NaN/Inf, broken invariants.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fpoc
