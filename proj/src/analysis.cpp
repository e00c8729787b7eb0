#include "fdsl/analysis.hpp"

#include "fdsl/errors.hpp"

#include <algorithm>

namespace fdsl {

namespace {

Real max3(const Real& a, const Real& b, const Real& c) { return std::max(a, std::max(b, c)); }

}  // namespace

std::pair<Real, Real> constants_ab(const BasicSolution& basic) {
    const Real y = basic.sqrt_lambda0;
    Real t = 1 + basic.beta / y;
    Real a = (sqrt(1 + t * t) + 1) / y;
    Real b = max3(Real(1), y / basic.M, y * sqrt(basic.c_tilde) / basic.M);
    return {a, b};
}

Real v0_bar(const BasicSolution& basic) {
    const Real y = basic.sqrt_lambda0;
    return max3(Real(1), basic.c_tilde, sqrt(basic.c_tilde) * basic.M / y) / basic.M;
}

Real radius_linear(const Real& v0bar, const Real& q_norm) {
    if (q_norm == 0)
        throw ZeroNorm("radius_linear: |q| = 0, the generating function is entire");
    if (q_norm < 0) throw ValidationError("radius_linear: q_norm must be nonnegative");
    return (1 + 2 * v0bar - 2 * sqrt(v0bar * (1 + v0bar))) / ((1 + v0bar) * q_norm);
}

Real radius_nonlinear(const Real& v0bar, const Real& q_norm, const MajorantNonlinearity& n1) {
    if (n1.trivial()) return radius_linear(v0bar, q_norm);
    const Real n1_at_0 = n1.value_at_zero();
    const Real n1p_at_0 = n1.derivative_at_zero();
    auto denom = [&](const Real& f) {
        return (1 + v0bar) *
               (q_norm * (f + v0bar) + eval_poly_coeffs(n1.shifted, f) + n1p_at_0 * v0bar -
                n1_at_0);
    };
    auto z = [&](const Real& f) { return (f - f * f) / denom(f); };
    // sign of z'(f) = sign of (1-2f) denom(f) - (f-f^2) denom'(f)
    auto z_deriv_sign = [&](const Real& f) {
        Real dpoly = 0;
        for (std::size_t p = n1.shifted.size(); p-- > 1;)
            dpoly = dpoly * f + n1.shifted[p] * static_cast<int>(p);
        Real ddenom = (1 + v0bar) * (q_norm + dpoly);
        return (1 - 2 * f) * denom(f) - (f - f * f) * ddenom;
    };

    // z vanishes at both ends of (0,1) and z'(0) > 0, so the maximizer is
    // interior; golden-section brackets it, bisection on z' pins it down.
    const Real inv_phi = (sqrt(Real(5)) - 1) / 2;
    Real a = 0, b = 1;
    Real x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    Real f1 = z(x1), f2 = z(x2);
    for (int it = 0; it < 120 && (b - a) > pow10(-8); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = z(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = z(x1);
        }
    }
    Real lo = a, hi = b;
    Real slo = z_deriv_sign(lo);
    const long bits = static_cast<long>(working_precision() + guard_digits());
    for (long it = 0; it < 4 * bits; ++it) {
        Real mid = (lo + hi) / 2;
        Real sm = z_deriv_sign(mid);
        if (sm == 0) {
            lo = hi = mid;
            break;
        }
        if ((slo > 0) == (sm > 0)) {
            lo = mid;
            slo = sm;
        } else {
            hi = mid;
        }
        if (hi - lo <= pow10(-bits) * hi) break;
    }
    return z((lo + hi) / 2);
}

Real rate_rn(const BasicSolution& basic, const Real& R) {
    if (!(R > 0)) throw ValidationError("rate_rn: R must be positive");
    const Real y = basic.sqrt_lambda0;
    Real t = 1 + basic.beta / y;
    return (1 + sqrt(1 + t * t)) / (y * R);
}

Real alpha_coeff(unsigned j) {
    if (j < 1) throw ValidationError("alpha_coeff: j must be >= 1");
    if (j == 1) return Real(1) / 4;
    // (2j-3)!!/(2 (2j)!!) via the ratio alpha_{k+1}/alpha_k = (2k-1)/(2k+2)
    Real a = Real(1) / 16;
    for (unsigned k = 2; k < j; ++k) a = a * (2 * k - 1) / (2 * k + 2);
    return a;
}

ErrorBounds error_bounds(const ConvergenceReport& report, unsigned m) {
    if (report.unconditional) return {Real(0), Real(0), Real(0)};
    if (!report.converged)
        throw NotConvergent("error_bounds: r_n >= 1, the a-priori convergence test fails");
    ErrorBounds out;
    const Real M = report.M_n, ct = report.c_tilde, r = report.r_n;
    const Real sl = report.sqrt_lambda0;
    out.C_nm = alpha_coeff(m + 1) * M / (1 - r);
    Real min3 = std::min(1 / M, std::min(1 / sl, 1 / (sl * sqrt(ct))));
    out.eigenfunction = out.C_nm * min3 * pow(r, static_cast<int>(m) + 1);
    Real mx = max3(Real(1), ct, sqrt(ct) * M / sl);
    out.eigenvalue = out.C_nm * pow(r, static_cast<int>(m)) / ((M + mx) * report.R);
    return out;
}

MajorantSeq majorant_sequence(const Real& v0bar, const Real& q_norm,
                              const MajorantNonlinearity* n1, unsigned count) {
    if (count < 1) throw ValidationError("majorant_sequence: count must be >= 1");
    const bool with_n1 = n1 != nullptr && !n1->trivial();
    const Real n1p0 = with_n1 ? n1->derivative_at_zero() : Real(0);
    MajorantSeq seq;
    seq.v.resize(count + 1);
    seq.mu.resize(count + 1);
    seq.v[0] = v0bar;
    seq.mu[0] = 0;
    seq.v[1] = (1 + v0bar) * (q_norm * v0bar + n1p0 * v0bar);
    seq.mu[1] = seq.v[1] / (1 + v0bar);
    SeriesJet jet;
    for (unsigned j = 2; j <= count; ++j) {
        Real conv = 0;
        for (unsigned p = 1; p <= j - 1; ++p) conv += seq.v[j - p] * seq.v[p];
        Real a_prev = 0;
        if (with_n1) {
            jet.assign(seq.v.begin(), seq.v.begin() + j);
            jet[0] = 0;
            a_prev = adomian_all(n1->shifted, jet)[j - 1];
        }
        seq.v[j] = conv + (1 + v0bar) * (q_norm * seq.v[j - 1] + a_prev);
        seq.mu[j] = seq.v[j] / (1 + v0bar);
    }
    return seq;
}

SlopeFit fit_log_line(const std::vector<Real>& positive_values) {
    const std::size_t n = positive_values.size();
    if (n < 2) throw ValidationError("fit_log_line: need at least two samples");
    std::vector<Real> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(positive_values[i] > 0))
            throw ValidationError("fit_log_line: samples must be positive");
        ys[i] = log(positive_values[i]);
    }
    Real mbar = Real(n - 1) / 2;
    Real ybar = 0;
    for (const auto& y : ys) ybar += y;
    ybar /= static_cast<int>(n);
    Real num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Real dm = Real(i) - mbar;
        num += dm * (ys[i] - ybar);
        den += dm * dm;
    }
    SlopeFit fit;
    fit.slope = num / den;
    fit.intercept = ybar - fit.slope * mbar;
    fit.max_dev = 0;
    for (std::size_t i = 0; i < n; ++i)
        fit.max_dev = std::max(fit.max_dev, abs(fit.slope * Real(i) + fit.intercept - ys[i]));
    return fit;
}

SlopeTable fit_slopes(const std::vector<Real>& sup_u_history,
                      const std::vector<Real>& lambda_history,
                      const std::vector<Real>& residual_history) {
    auto absed = [](const std::vector<Real>& v) {
        std::vector<Real> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = abs(v[i]);
        return out;
    };
    SlopeTable table;
    table.u = fit_log_line(absed(sup_u_history));
    table.lambda = fit_log_line(absed(lambda_history));
    table.r = fit_log_line(absed(residual_history));
    return table;
}

ConvergenceReport make_convergence_report(const ProblemSpec& spec, const BasicSolution& basic,
                                          unsigned m) {
    ConvergenceReport report;
    report.n = basic.n;
    report.m = m;
    report.M_n = basic.M;
    report.c_tilde = basic.c_tilde;
    report.sqrt_lambda0 = basic.sqrt_lambda0;
    auto [a, b] = constants_ab(basic);
    report.a_n = a;
    report.b_n = b;
    report.v0_bar = v0_bar(basic);
    report.q_norm = q_l1_norm(spec);

    if (report.q_norm == 0 && spec.linear()) {
        // Unperturbed problem: every correction vanishes identically.
        report.unconditional = true;
        report.converged = true;
        report.R = 0;
        report.r_n = 0;
        report.C_nm = 0;
        report.eigenvalue_bound = 0;
        report.eigenfunction_bound = 0;
        return report;
    }

    if (spec.linear()) {
        report.R = radius_linear(report.v0_bar, report.q_norm);
    } else {
        MajorantNonlinearity n1 =
            make_majorant(spec.nonlin_coeffs, u0_sup_norm(basic).bound);
        report.R = radius_nonlinear(report.v0_bar, report.q_norm, n1);
    }
    report.r_n = rate_rn(basic, report.R);
    report.converged = report.r_n < 1;
    if (report.converged) {
        ErrorBounds bounds = error_bounds(report, m);
        report.C_nm = bounds.C_nm;
        report.eigenvalue_bound = bounds.eigenvalue;
        report.eigenfunction_bound = bounds.eigenfunction;
    }
    return report;
}

}  // namespace fdsl
