#pragma once

#include "fdsl/problem.hpp"

namespace fdsl {

/// Independent cross-check of the FD results: a plain double-precision
/// shooting solver for the same problem class. It validates correctness at
/// ~1e-8, not ultimate accuracy.
struct ShootingResult {
    double lambda = 0;
    double terminal_value = 0;  ///< u(1) at the returned lambda
    long steps = 0;
    double estimated_error = 0;
};

/// Integrates u'' = (q - lambda) u + N(u), u(0) = 0, u'(0) = 1 across the
/// breakpoint-delimited subintervals with an adaptive Dormand-Prince pair,
/// applying the derivative jump beta*u(alpha) at alpha, and returns u(1).
/// Singular abscissae are approached no closer than a 1e-12 offset whose
/// contribution is added in closed form.
double shoot(const ProblemSpec& spec, double lambda, double integrator_tol = 1e-12);

/// Bisection plus secant refinement on lambda -> u(1; lambda).
ShootingResult find_eigenvalue(const ProblemSpec& spec, double lambda_lo, double lambda_hi,
                               double lambda_tol = 1e-8, double integrator_tol = 1e-12);

/// u at the given interior sample points (sorted ascending), for pointwise
/// comparison against closed forms.
std::vector<double> shoot_samples(const ProblemSpec& spec, double lambda,
                                  const std::vector<double>& xs, double integrator_tol = 1e-12);

}  // namespace fdsl
