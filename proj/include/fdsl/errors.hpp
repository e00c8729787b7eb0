#pragma once

#include <stdexcept>
#include <string>

namespace fdsl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Evaluation point coincides with a singular abscissa of the potential.
struct SingularEvaluation : Error {
    using Error::Error;
};

/// No sign change found when bracketing a characteristic root.
struct BracketFailure : Error {
    using Error::Error;
};

/// The non-resonant coefficient formula hit a vanishing denominator,
/// which indicates a misclassified resonance.
struct DegenerateDenominator : Error {
    using Error::Error;
};

/// The K-doubling search for quadrature parameters hit its cap.
struct ParameterSearchExhausted : Error {
    using Error::Error;
};

/// Shooting bracket endpoints do not straddle a root.
struct NoSignChange : Error {
    using Error::Error;
};

/// Adaptive integrator steps collapsed near a singularity.
struct StepUnderflow : Error {
    using Error::Error;
};

/// Requested a-priori bounds while the convergence hypothesis fails.
struct NotConvergent : Error {
    using Error::Error;
};

/// The potential has zero L1 norm, so the convergence radius is unbounded.
struct ZeroNorm : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

}  // namespace fdsl
