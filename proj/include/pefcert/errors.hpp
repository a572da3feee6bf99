#pragma once

#include <stdexcept>
#include <string>

namespace pefcert {

/// Bad input: out-of-range parameters, malformed documents, violated preconditions.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed (non-convergence, degenerate enumeration, infeasible LP).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pefcert
