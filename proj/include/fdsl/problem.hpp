#pragma once

#include "fdsl/real.hpp"

#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace fdsl {

/// q term: c0 + c1*x + c2*x^2 + ...
struct PolynomialTerm {
    std::vector<Real> coefficients;
};

/// q term: scale / sqrt(|center - stretch*x|). Integrable on (0,1); the
/// singular abscissa center/stretch must lie in [0,1].
struct InverseSqrtTerm {
    Real scale;
    Real center;
    Real stretch;

    Real abscissa() const { return center / stretch; }
};

/// Host-provided q term. Singular abscissae must be declared so grids can be
/// split around them; the L1 norm of such terms falls back to quadrature.
struct CallbackTerm {
    std::function<Real(const Real&)> fn;
    std::vector<Real> singular_points;
};

using PotentialTerm = std::variant<PolynomialTerm, InverseSqrtTerm, CallbackTerm>;

struct Rational {
    long long num = 0;
    long long den = 1;
};

/// A full problem instance:
///   u'' - [beta*delta(x - alpha) + q(x)]u + lambda*u - N(u) = 0 on (0,1),
///   u(0) = u(1) = 0, u'(0) = 1,
/// with q given as a term list and N(u) = sum a_p u^p a finite polynomial
/// without constant term.
struct ProblemSpec {
    Real alpha;
    std::optional<Rational> alpha_exact;  ///< set when alpha is an exact rational
    Real beta = 0;
    std::vector<PotentialTerm> q_terms;
    std::map<unsigned, Real> nonlin_coeffs;  ///< degree p >= 1 -> a_p
    std::vector<Real> breakpoints;           ///< declared interior singularities of q

    bool linear() const { return nonlin_coeffs.empty(); }

    /// Whether n*alpha is an integer. Exact for rational alpha, otherwise
    /// |n*alpha - round(n*alpha)| < 10^(-P/2).
    bool resonant(unsigned n) const;

    /// Singular abscissae collected from the terms plus declared breakpoints,
    /// sorted, deduplicated at eps_machine.
    std::vector<Real> singular_abscissae() const;

    /// Subinterval endpoints for composite grids: singular abscissae plus
    /// alpha, sorted. alpha is always a split point.
    std::vector<Real> split_points() const;

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

Real eval_potential_term(const PotentialTerm& term, const Real& x);

/// q(x). Throws SingularEvaluation if x is within eps_machine of a singular
/// abscissa.
Real eval_potential(const ProblemSpec& spec, const Real& x);

/// N(u) = sum a_p u^p. N(0) = 0 by construction.
Real eval_nonlinearity(const ProblemSpec& spec, const Real& u);

/// Integral of |q| over (0,1). Closed form when every term admits one and the
/// terms cannot cancel each other; adaptive tanh-rule quadrature otherwise.
Real q_l1_norm(const ProblemSpec& spec);

/// Forced-quadrature route for cross-checking the closed forms.
Real q_l1_norm_quadrature(const ProblemSpec& spec, const Real& rel_tol);

}  // namespace fdsl
