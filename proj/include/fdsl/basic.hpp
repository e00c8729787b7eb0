#pragma once

#include "fdsl/problem.hpp"
#include "fdsl/real.hpp"

namespace fdsl {

/// Solution of the unperturbed eigenproblem (q and N dropped, the delta
/// interaction kept): u0'' + lambda0*u0 = 0 with u0(0) = u0(1) = 0,
/// u0'(0) = 1 and the derivative jump beta*u0(alpha) at alpha.
struct BasicSolution {
    unsigned n = 0;
    Real lambda0;       ///< in squared units throughout
    Real sqrt_lambda0;
    Real c0;            ///< right-branch amplitude
    Real M;             ///< lambda0 * int_0^1 u0^2, in closed form
    Real c_tilde;       ///< lambda0 * c0^2
    bool resonant = false;  ///< n*alpha integer
    Real alpha;
    Real beta;
};

/// Characteristic function y*sin(y) + beta*sin(y*alpha)*sin(y*(1-alpha)),
/// whose positive roots y = sqrt(lambda0) enumerate the basic eigenvalues.
Real characteristic(const Real& y, const Real& alpha, const Real& beta);

/// n-th basic eigenpair. For beta = 0 or the resonant case lambda0 = (pi n)^2
/// directly; otherwise the unique root in (pi n, pi (n+1)) is bracketed by a
/// sign scan and polished with a safeguarded Newton iteration.
BasicSolution solve_basic(const ProblemSpec& spec, unsigned n);

Real eval_u0(const BasicSolution& basic, const Real& x);
Real eval_u0_prime(const BasicSolution& basic, const Real& x);

struct SupNorm {
    Real bound;    ///< max{1, sqrt(c_tilde)} / sqrt(lambda0)
    Real sampled;  ///< maximum over a fine sample grid, for reporting
};

SupNorm u0_sup_norm(const BasicSolution& basic);

}  // namespace fdsl
