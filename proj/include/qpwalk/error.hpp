#pragma once

#include <stdexcept>
#include <string>

namespace qpwalk {

/// Caller supplied an argument outside the operation's domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation failed to produce a trustworthy number: non-finite
/// integrand, quadrature that will not converge, divergent estimate.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qpwalk
