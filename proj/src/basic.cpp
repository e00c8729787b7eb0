#include "fdsl/basic.hpp"

#include "fdsl/errors.hpp"

namespace fdsl {

namespace {

// The Newton iteration runs on f(y) = sin(y)/(sin(y a) sin(y (1-a))) + b/y,
// which shares its roots with the characteristic function but has a simple
// derivative; all bracketing decisions use the pole-free characteristic.
Real newton_form(const Real& y, const Real& alpha, const Real& beta) {
    return sin(y) / (sin(y * alpha) * sin(y * (1 - alpha))) + beta / y;
}

Real newton_form_derivative(const Real& y, const Real& alpha, const Real& beta) {
    Real sa = sin(y * alpha), sb = sin(y * (1 - alpha));
    Real ca = cos(y * alpha), cb = cos(y * (1 - alpha));
    Real den = sa * sb;
    Real dden = alpha * ca * sb + (1 - alpha) * sa * cb;
    return (cos(y) * den - sin(y) * dden) / (den * den) - beta / (y * y);
}

// Bracket the unique interior root of the characteristic on
// (pi n + margin, pi (n+1) - margin) by scanning with successively finer
// subdivisions.
std::pair<Real, Real> bracket_root(unsigned n, const Real& alpha, const Real& beta) {
    const Real margin = pow10(-6) * pi();
    const Real lo = pi() * n + margin;
    const Real hi = pi() * (n + 1) - margin;
    for (int cells = 64; cells <= (1 << 14); cells *= 4) {
        Real xl = lo;
        Real fl = characteristic(xl, alpha, beta);
        for (int i = 1; i <= cells; ++i) {
            Real xr = lo + (hi - lo) * i / cells;
            Real fr = characteristic(xr, alpha, beta);
            if (fl == 0) return {xl, xl};
            if ((fl < 0) != (fr < 0)) return {xl, xr};
            xl = xr;
            fl = fr;
        }
        if (fl == 0) return {xl, xl};
    }
    throw BracketFailure("solve_basic: no sign change of the characteristic in (pi n, pi (n+1)); "
                         "alpha is numerically degenerate near a resonance (declare it rational)");
}

Real polish_root(Real lo, Real hi, unsigned n, const Real& alpha, const Real& beta) {
    if (lo == hi) return lo;
    Real flo = characteristic(lo, alpha, beta);
    // Narrow by bisection first so Newton starts well inside the bracket.
    for (int it = 0; it < 12; ++it) {
        Real mid = (lo + hi) / 2;
        Real fm = characteristic(mid, alpha, beta);
        if (fm == 0) return mid;
        if ((flo < 0) == (fm < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Real y = (lo + hi) / 2;
    const Real step_tol = pow10(-static_cast<long>(working_precision() + guard_digits() - 2));
    for (int it = 0; it < 200; ++it) {
        Real f = newton_form(y, alpha, beta);
        Real df = newton_form_derivative(y, alpha, beta);
        Real next = df != 0 ? y - f / df : lo - 1;  // force a bisection fallback
        if (!(next > lo && next < hi)) {
            Real fm = characteristic((lo + hi) / 2, alpha, beta);
            if (fm == 0) return (lo + hi) / 2;
            if ((flo < 0) == (fm < 0)) {
                lo = (lo + hi) / 2;
                flo = fm;
            } else {
                hi = (lo + hi) / 2;
            }
            y = (lo + hi) / 2;
            continue;
        }
        Real change = abs(next - y);
        Real fc = characteristic(next, alpha, beta);
        if ((flo < 0) == (fc < 0)) {
            lo = next;
            flo = fc;
        } else {
            hi = next;
        }
        y = next;
        if (change <= step_tol * y || fc == 0) break;
        (void)n;
    }
    return y;
}

}  // namespace

Real characteristic(const Real& y, const Real& alpha, const Real& beta) {
    return y * sin(y) + beta * sin(y * alpha) * sin(y * (1 - alpha));
}

BasicSolution solve_basic(const ProblemSpec& spec, unsigned n) {
    if (n < 1) throw ValidationError("solve_basic: eigenpair index must be >= 1");
    BasicSolution out;
    out.n = n;
    out.alpha = spec.alpha;
    out.beta = spec.beta;
    out.resonant = spec.resonant(n);

    const Real alpha = spec.alpha, beta = spec.beta;
    Real y;
    if (beta == 0 || out.resonant) {
        y = pi() * n;
        out.sqrt_lambda0 = y;
        out.lambda0 = y * y;
        out.c0 = (n % 2 == 1 ? Real(1) : Real(-1)) / y;
    } else {
        auto [lo, hi] = bracket_root(n, alpha, beta);
        y = polish_root(lo, hi, n, alpha, beta);
        out.sqrt_lambda0 = y;
        out.lambda0 = y * y;
        Real s1ma = sin(y * (1 - alpha));
        if (abs(s1ma) < pow10(-static_cast<long>(working_precision() / 2)))
            out.c0 = -cos(y) / y;
        else
            out.c0 = sin(y * alpha) / (y * s1ma);
    }

    const Real sa = sin(y * alpha);
    const Real ca = cos(y * alpha);
    out.c_tilde = sa * sa + (ca + beta / y * sa) * (ca + beta / y * sa);
    out.M = (1 + (beta * sin(2 * y * alpha) / y + beta * beta * sa * sa / out.lambda0) *
                     (1 - alpha) +
             beta * sa * sa / out.lambda0) /
            2;
    return out;
}

Real eval_u0(const BasicSolution& basic, const Real& x) {
    if (x <= basic.alpha) return sin(basic.sqrt_lambda0 * x) / basic.sqrt_lambda0;
    return basic.c0 * sin(basic.sqrt_lambda0 * (1 - x));
}

Real eval_u0_prime(const BasicSolution& basic, const Real& x) {
    if (x <= basic.alpha) return cos(basic.sqrt_lambda0 * x);
    return -basic.c0 * basic.sqrt_lambda0 * cos(basic.sqrt_lambda0 * (1 - x));
}

SupNorm u0_sup_norm(const BasicSolution& basic) {
    SupNorm out;
    out.bound = std::max(Real(1), sqrt(basic.c_tilde)) / basic.sqrt_lambda0;
    const int samples = 2048;
    Real best = abs(eval_u0(basic, basic.alpha));
    for (int i = 1; i < samples; ++i) {
        Real v = abs(eval_u0(basic, Real(i) / samples));
        if (v > best) best = v;
    }
    out.sampled = best;
    return out;
}

}  // namespace fdsl
