#pragma once

#include <stdexcept>
#include <string>

namespace dys {

/// A stepsize, penalty parameter, or solver parameter violates its
/// admissibility condition (e.g. gamma * rho >= 1).
struct ParameterOutOfRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A linear system that should be positive definite failed to factorize.
struct FactorizationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An inner iterative solve (e.g. the Newton prox of a non-quadratic
/// smooth term) did not reach its tolerance.
struct InnerSolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterate acquired a NaN/Inf coordinate, which usually signals an
/// inadmissible stepsize.
struct NonFiniteIterate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No positive certified stepsize exists for the supplied constants.
struct NoCertificate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dimensions passed to an instance factory are inconsistent.
struct InvalidDimensions : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An operation requires a capability (exact prox, Hessian-vector
/// product) that the supplied term does not provide.
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dys
