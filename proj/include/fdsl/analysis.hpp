#pragma once

#include "fdsl/adomian.hpp"
#include "fdsl/basic.hpp"
#include "fdsl/problem.hpp"

#include <optional>
#include <vector>

namespace fdsl {

/// A-priori convergence data for one eigenpair: majorant seed, convergence
/// radius of the generating function, the rate r_n and, when r_n < 1, the
/// constants and error bounds of the a-priori estimates.
struct ConvergenceReport {
    unsigned n = 0;
    unsigned m = 0;
    Real v0_bar;
    Real a_n, b_n;
    Real M_n, c_tilde;
    Real sqrt_lambda0;
    Real q_norm;
    bool unconditional = false;  ///< q == 0 and N == 0: every correction vanishes
    Real R;
    Real r_n;
    bool converged = false;  ///< r_n < 1
    Real C_nm;               ///< valid when converged
    Real eigenvalue_bound;   ///< valid when converged
    Real eigenfunction_bound;
};

struct SlopeFit {
    Real slope;
    Real intercept;
    Real max_dev;
};

struct SlopeTable {
    SlopeFit u, lambda, r;
};

/// a(n) and b(n): the per-order amplification constants of the correction
/// estimates.
std::pair<Real, Real> constants_ab(const BasicSolution& basic);

/// Majorant seed max{1, c~, sqrt(c~) M/sqrt(lambda0)}/M.
Real v0_bar(const BasicSolution& basic);

/// Convergence radius in the linear case (N == 0), in closed form.
Real radius_linear(const Real& v0bar, const Real& q_norm);

/// Convergence radius in the nonlinear case: the maximum of the inverse map
///   z(f) = (f - f^2) / ((1+v0)[|q| (f+v0) + N1(f) + N1'(0) v0 - N1(0)])
/// over f in (0,1), located by golden-section search refined by bisection on
/// the derivative's sign. Reduces to radius_linear for a trivial majorant.
Real radius_nonlinear(const Real& v0bar, const Real& q_norm, const MajorantNonlinearity& n1);

/// r_n = (1 + sqrt(1 + (1 + beta/sqrt(lambda0))^2)) / (sqrt(lambda0) R).
Real rate_rn(const BasicSolution& basic, const Real& R);

/// Generating-function coefficient cap: 1/4 for j = 1, (2j-3)!!/(2 (2j)!!)
/// for j >= 2.
Real alpha_coeff(unsigned j);

struct ErrorBounds {
    Real eigenvalue;
    Real eigenfunction;
    Real C_nm;
};

/// A-priori rank-m error bounds; throws NotConvergent when r_n >= 1.
ErrorBounds error_bounds(const ConvergenceReport& report, unsigned m);

struct MajorantSeq {
    std::vector<Real> v;   // v[0] = v0_bar
    std::vector<Real> mu;  // mu[0] unused
};

/// Majorant recurrences: v_1 = (1+v0)(|q| + N1'(0)) v0 and
/// v_j = sum v_{j-p} v_p + (1+v0)(|q| v_{j-1} + A_{j-1}(N1; 0, v_1, ...)),
/// with mu_j = v_j/(1+v0). Pass nullptr for the linear case.
MajorantSeq majorant_sequence(const Real& v0bar, const Real& q_norm,
                              const MajorantNonlinearity* n1, unsigned count);

/// Least-squares line through (m, ln value), plus the maximum deviation.
SlopeFit fit_log_line(const std::vector<Real>& positive_values);

/// The three regression series: per-order sup norms, per-order |lambda_j|,
/// per-rank residuals.
SlopeTable fit_slopes(const std::vector<Real>& sup_u_history,
                      const std::vector<Real>& lambda_history,
                      const std::vector<Real>& residual_history);

ConvergenceReport make_convergence_report(const ProblemSpec& spec, const BasicSolution& basic,
                                          unsigned m);

}  // namespace fdsl
