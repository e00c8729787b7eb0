#include "fdsl/problem.hpp"

#include "fdsl/errors.hpp"
#include "fdsl/sincquad.hpp"

#include <algorithm>
#include <cstdlib>

namespace fdsl {

namespace {

Real round_nearest(const Real& x) {
    Real r;
    mpfr_round(r.backend().data(), x.backend().data());
    return r;
}

// 2*|scale|/sqrt(|stretch|) * (sqrt(x0) + sqrt(1-x0)): integral of
// |scale|/sqrt(|center - stretch*x|) over (0,1) with x0 = center/stretch.
Real inverse_sqrt_l1(const InverseSqrtTerm& t) {
    Real x0 = t.abscissa();
    if (x0 < 0) x0 = 0;
    if (x0 > 1) x0 = 1;
    return 2 * abs(t.scale) / sqrt(abs(t.stretch)) * (sqrt(x0) + sqrt(1 - x0));
}

Real eval_poly(const std::vector<Real>& c, const Real& x) {
    Real acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<Real> poly_antiderivative(const std::vector<Real>& c) {
    std::vector<Real> a(c.size() + 1);
    a[0] = 0;
    for (std::size_t i = 0; i < c.size(); ++i) a[i + 1] = c[i] / Real(i + 1);
    return a;
}

// Odd-order roots of p in (lo, hi), located by a sign scan plus bisection.
// Samples that are exactly zero become cut points directly.
std::vector<Real> poly_sign_changes(const std::vector<Real>& c, const Real& lo, const Real& hi) {
    const int cells = 512;
    std::vector<Real> roots;
    Real step = (hi - lo) / cells;
    Real xl = lo;
    Real fl = eval_poly(c, xl);
    for (int i = 1; i <= cells; ++i) {
        Real xr = lo + step * i;
        Real fr = eval_poly(c, xr);
        if (fr == 0 && (roots.empty() || roots.back() != xr)) roots.push_back(xr);
        if (fl != 0 && fr != 0 && (fl < 0) != (fr < 0)) {
            Real a = xl, b = xr, fa = fl;
            for (int it = 0; it < static_cast<int>(4 * working_precision()); ++it) {
                Real m = (a + b) / 2;
                Real fm = eval_poly(c, m);
                if (fm == 0) {
                    a = b = m;
                    break;
                }
                if ((fa < 0) == (fm < 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push_back((a + b) / 2);
        }
        xl = xr;
        fl = fr;
    }
    return roots;
}

// Exact integral of |p| over (0,1) by splitting at the sign changes.
Real poly_l1(const std::vector<Real>& c) {
    std::vector<Real> cuts = poly_sign_changes(c, Real(0), Real(1));
    cuts.insert(cuts.begin(), Real(0));
    cuts.push_back(Real(1));
    std::vector<Real> anti = poly_antiderivative(c);
    Real total = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += abs(eval_poly(anti, cuts[i + 1]) - eval_poly(anti, cuts[i]));
    return total;
}

// -1, 0 or +1 for a polynomial that does not change sign on (0,1); nullopt if
// it does.
std::optional<int> poly_constant_sign(const std::vector<Real>& c) {
    if (!poly_sign_changes(c, Real(0), Real(1)).empty()) return std::nullopt;
    Real probe = eval_poly(c, Real(1) / 3) + eval_poly(c, Real(1) / 2) + eval_poly(c, Real(2) / 3);
    if (probe == 0) return 0;
    return probe > 0 ? 1 : -1;
}

}  // namespace

bool ProblemSpec::resonant(unsigned n) const {
    if (alpha_exact) {
        long long p = alpha_exact->num, q = alpha_exact->den;
        return (static_cast<long long>(n) * p) % q == 0;
    }
    Real na = alpha * n;
    return abs(na - round_nearest(na)) < pow10(-static_cast<long>(working_precision() / 2));
}

std::vector<Real> ProblemSpec::singular_abscissae() const {
    std::vector<Real> pts = breakpoints;
    for (const auto& term : q_terms) {
        if (const auto* inv = std::get_if<InverseSqrtTerm>(&term)) {
            pts.push_back(inv->abscissa());
        } else if (const auto* cb = std::get_if<CallbackTerm>(&term)) {
            pts.insert(pts.end(), cb->singular_points.begin(), cb->singular_points.end());
        }
    }
    std::sort(pts.begin(), pts.end());
    std::vector<Real> out;
    const Real eps = eps_machine();
    for (const auto& p : pts) {
        if (p <= eps || p >= 1 - eps) continue;  // endpoint singularities need no split
        if (out.empty() || p - out.back() > eps) out.push_back(p);
    }
    return out;
}

std::vector<Real> ProblemSpec::split_points() const {
    std::vector<Real> pts = singular_abscissae();
    const Real eps = eps_machine();
    auto pos = std::lower_bound(pts.begin(), pts.end(), alpha);
    bool have_alpha = (pos != pts.end() && *pos - alpha <= eps) ||
                      (pos != pts.begin() && alpha - *(pos - 1) <= eps);
    if (!have_alpha) pts.insert(pos, alpha);
    return pts;
}

void ProblemSpec::validate() const {
    if (!(alpha > 0 && alpha < 1)) throw ValidationError("alpha: must lie strictly inside (0,1)");
    if (alpha_exact) {
        if (alpha_exact->den <= 0 || alpha_exact->num <= 0 || alpha_exact->num >= alpha_exact->den)
            throw ValidationError("alpha: exact rational must satisfy 0 < m/n < 1");
        if (!approx_equal(alpha, Real(alpha_exact->num) / alpha_exact->den))
            throw ValidationError("alpha: numeric value disagrees with the declared rational");
    }
    if (beta < 0) throw ValidationError("beta: must be nonnegative");
    for (const auto& [deg, coeff] : nonlin_coeffs) {
        (void)coeff;
        if (deg < 1) throw ValidationError("nonlinearity: degrees must be >= 1 so that N(0) = 0");
    }
    const Real eps = eps_machine();
    for (const auto& term : q_terms) {
        if (const auto* inv = std::get_if<InverseSqrtTerm>(&term)) {
            if (inv->stretch == 0) throw ValidationError("q: inverse_sqrt stretch must be nonzero");
            Real x0 = inv->abscissa();
            if (x0 < -eps || x0 > 1 + eps)
                throw ValidationError("q: inverse_sqrt singular abscissa must lie in [0,1]");
        } else if (const auto* cb = std::get_if<CallbackTerm>(&term)) {
            if (!cb->fn) throw ValidationError("q: callback term has no function");
            for (const auto& s : cb->singular_points)
                if (s < -eps || s > 1 + eps)
                    throw ValidationError("q: callback singular point must lie in [0,1]");
        }
    }
    std::vector<Real> bps = breakpoints;
    std::sort(bps.begin(), bps.end());
    for (std::size_t i = 0; i < bps.size(); ++i) {
        if (!(bps[i] > 0 && bps[i] < 1))
            throw ValidationError("breakpoints: must lie strictly inside (0,1)");
        if (i > 0 && bps[i] - bps[i - 1] <= eps)
            throw ValidationError("breakpoints: must be pairwise distinct");
    }
}

Real eval_potential_term(const PotentialTerm& term, const Real& x) {
    if (const auto* poly = std::get_if<PolynomialTerm>(&term)) return eval_poly(poly->coefficients, x);
    if (const auto* inv = std::get_if<InverseSqrtTerm>(&term)) {
        Real r = inv->center - inv->stretch * x;
        if (abs(r) < abs(inv->stretch) * eps_machine())
            throw SingularEvaluation("potential evaluated at a singular abscissa, x = " +
                                     to_string(x, 8));
        return inv->scale / sqrt(abs(r));
    }
    return std::get<CallbackTerm>(term).fn(x);
}

Real eval_potential(const ProblemSpec& spec, const Real& x) {
    const Real eps = eps_machine();
    for (const auto& term : spec.q_terms) {
        if (const auto* cb = std::get_if<CallbackTerm>(&term)) {
            for (const auto& s : cb->singular_points)
                if (abs(x - s) < eps)
                    throw SingularEvaluation("potential evaluated at a singular abscissa, x = " +
                                             to_string(x, 8));
        }
    }
    Real total = 0;
    for (const auto& term : spec.q_terms) total += eval_potential_term(term, x);
    return total;
}

Real eval_nonlinearity(const ProblemSpec& spec, const Real& u) {
    Real total = 0;
    for (const auto& [deg, coeff] : spec.nonlin_coeffs) total += coeff * pow(u, deg);
    return total;
}

Real q_l1_norm(const ProblemSpec& spec) {
    if (spec.q_terms.empty()) return 0;

    // Closed forms apply when no term can cancel another: all inverse-sqrt
    // scales share one sign and every polynomial term is single-signed on
    // (0,1) with a compatible sign. A lone polynomial is always exact.
    bool closed_form = true;
    int sign = 0;  // 0 until fixed
    for (const auto& term : spec.q_terms) {
        if (std::holds_alternative<CallbackTerm>(term)) {
            closed_form = false;
            break;
        }
        int s = 0;
        if (const auto* inv = std::get_if<InverseSqrtTerm>(&term)) {
            if (inv->scale == 0) continue;
            s = inv->scale > 0 ? 1 : -1;
        } else {
            const auto& poly = std::get<PolynomialTerm>(term);
            if (spec.q_terms.size() == 1) return poly_l1(poly.coefficients);
            auto ps = poly_constant_sign(poly.coefficients);
            if (!ps) {
                closed_form = false;
                break;
            }
            s = *ps;
        }
        if (s == 0) continue;
        if (sign == 0)
            sign = s;
        else if (sign != s) {
            closed_form = false;
            break;
        }
    }

    if (closed_form) {
        Real total = 0;
        for (const auto& term : spec.q_terms) {
            if (const auto* inv = std::get_if<InverseSqrtTerm>(&term))
                total += inverse_sqrt_l1(*inv);
            else
                total += poly_l1(std::get<PolynomialTerm>(term).coefficients);
        }
        return total;
    }
    return q_l1_norm_quadrature(spec, pow10(-static_cast<long>(working_precision() / 2) + 2));
}

Real q_l1_norm_quadrature(const ProblemSpec& spec, const Real& rel_tol) {
    if (spec.q_terms.empty()) return 0;

    // Pieces delimited by singular abscissae; |q| additionally kinks where q
    // changes sign, so those points are located and become piece boundaries.
    std::vector<Real> cuts{Real(0)};
    for (const auto& p : spec.singular_abscissae()) cuts.push_back(p);
    cuts.push_back(Real(1));

    std::vector<Real> refined{cuts.front()};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Real a = cuts[i], b = cuts[i + 1];
        const int cells = 1024;
        Real prev_x = 0, prev_f = 0;
        bool have_prev = false;
        for (int c = 0; c < cells; ++c) {
            Real x = a + (b - a) * (2 * c + 1) / (2 * cells);  // midpoints avoid the singular ends
            Real f = eval_potential(spec, x);
            if (f == 0) refined.push_back(x);
            if (have_prev && prev_f != 0 && f != 0 && (prev_f < 0) != (f < 0)) {
                Real lo = prev_x, hi = x, flo = prev_f;
                for (int it = 0; it < static_cast<int>(2 * working_precision()); ++it) {
                    Real m = (lo + hi) / 2;
                    Real fm = eval_potential(spec, m);
                    if (fm == 0) {
                        lo = hi = m;
                        break;
                    }
                    if ((flo < 0) == (fm < 0)) {
                        lo = m;
                        flo = fm;
                    } else {
                        hi = m;
                    }
                }
                refined.push_back((lo + hi) / 2);
            }
            prev_x = x;
            prev_f = f;
            have_prev = true;
        }
        refined.push_back(b);
    }

    // |q| at a node, evaluating terms that are singular at one of the piece's
    // endpoints off the stable node-to-endpoint distance.
    const Real eps = eps_machine();
    auto abs_q_at = [&](const SincGrid& grid, std::size_t i) {
        Real acc = 0;
        for (const auto& term : spec.q_terms) {
            if (const auto* inv = std::get_if<InverseSqrtTerm>(&term)) {
                Real x0 = inv->abscissa();
                if (abs(x0 - grid.a) <= eps) {
                    acc += inv->scale / sqrt(abs(inv->stretch) * grid.dist_a[i]);
                    continue;
                }
                if (abs(x0 - grid.b) <= eps) {
                    acc += inv->scale / sqrt(abs(inv->stretch) * grid.dist_b[i]);
                    continue;
                }
            }
            acc += eval_potential_term(term, grid.nodes[i]);
        }
        return abs(acc);
    };

    Real total = 0;
    for (std::size_t i = 0; i + 1 < refined.size(); ++i) {
        if (!(refined[i + 1] > refined[i])) continue;
        total += adaptive_tanh_integrate_nodes(abs_q_at, refined[i], refined[i + 1], rel_tol);
    }
    return total;
}

}  // namespace fdsl
