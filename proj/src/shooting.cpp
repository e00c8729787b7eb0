#include "fdsl/shooting.hpp"

#include "fdsl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fdsl {

namespace {

constexpr double kSingularOffset = 1e-12;

struct DoubleProblem {
    double alpha = 0;
    double beta = 0;
    struct Poly {
        std::vector<double> c;
    };
    struct InvSqrt {
        double scale, center, stretch, abscissa;
    };
    std::vector<Poly> polys;
    std::vector<InvSqrt> invs;
    std::vector<const CallbackTerm*> callbacks;
    std::vector<std::pair<unsigned, double>> nonlin;
    std::vector<double> boundaries;      // 0 ... 1 including alpha and singular points
    std::vector<bool> boundary_singular; // aligned with boundaries

    double q(double x) const {
        double acc = 0;
        for (const auto& p : polys) {
            double v = 0;
            for (auto it = p.c.rbegin(); it != p.c.rend(); ++it) v = v * x + *it;
            acc += v;
        }
        for (const auto& t : invs) acc += t.scale / std::sqrt(std::fabs(t.center - t.stretch * x));
        for (const auto* cb : callbacks) acc += static_cast<double>(cb->fn(Real(x)));
        return acc;
    }

    double N(double u) const {
        double acc = 0;
        for (const auto& [p, a] : nonlin) acc += a * std::pow(u, static_cast<int>(p));
        return acc;
    }

    // Signed integral of q over a sliver [lo, hi] hugging the singular point
    // s (an endpoint of the sliver); smooth parts enter at their midpoint.
    double sliver_q_integral(double lo, double hi, double s) const {
        double acc = 0;
        double mid = (lo + hi) / 2, len = hi - lo;
        for (const auto& p : polys) {
            double v = 0;
            for (auto it = p.c.rbegin(); it != p.c.rend(); ++it) v = v * mid + *it;
            acc += v * len;
        }
        for (const auto& t : invs) {
            if (std::fabs(t.abscissa - s) < 1e-9) {
                acc += t.scale * 2 * std::sqrt(len / std::fabs(t.stretch));
            } else {
                acc += t.scale / std::sqrt(std::fabs(t.center - t.stretch * mid)) * len;
            }
        }
        for (const auto* cb : callbacks) acc += static_cast<double>(cb->fn(Real(mid))) * len;
        return acc;
    }
};

DoubleProblem lower(const ProblemSpec& spec) {
    DoubleProblem p;
    p.alpha = static_cast<double>(spec.alpha);
    p.beta = static_cast<double>(spec.beta);
    for (const auto& term : spec.q_terms) {
        if (const auto* poly = std::get_if<PolynomialTerm>(&term)) {
            DoubleProblem::Poly dp;
            for (const auto& c : poly->coefficients) dp.c.push_back(static_cast<double>(c));
            p.polys.push_back(std::move(dp));
        } else if (const auto* inv = std::get_if<InverseSqrtTerm>(&term)) {
            p.invs.push_back({static_cast<double>(inv->scale), static_cast<double>(inv->center),
                              static_cast<double>(inv->stretch),
                              static_cast<double>(inv->abscissa())});
        } else {
            p.callbacks.push_back(&std::get<CallbackTerm>(term));
        }
    }
    for (const auto& [deg, c] : spec.nonlin_coeffs) p.nonlin.emplace_back(deg, static_cast<double>(c));

    std::vector<double> singulars;
    for (const auto& s : spec.singular_abscissae()) singulars.push_back(static_cast<double>(s));
    std::vector<std::pair<double, bool>> marks;
    marks.emplace_back(0.0, false);
    marks.emplace_back(1.0, false);
    marks.emplace_back(p.alpha, false);
    for (double s : singulars) marks.emplace_back(s, true);
    // endpoint singularities of inverse-sqrt terms
    for (const auto& t : p.invs) {
        if (std::fabs(t.abscissa) < 1e-15) marks[0].second = true;
        if (std::fabs(t.abscissa - 1.0) < 1e-15) marks[1].second = true;
    }
    std::sort(marks.begin(), marks.end());
    for (const auto& [x, is_singular] : marks) {
        if (!p.boundaries.empty() && x - p.boundaries.back() < 1e-14) {
            p.boundary_singular.back() = p.boundary_singular.back() || is_singular;
            continue;
        }
        p.boundaries.push_back(x);
        p.boundary_singular.push_back(is_singular);
    }
    return p;
}

struct State {
    double u, v;
};

// Dormand-Prince 5(4) step: returns the 5th-order solution and the embedded
// error estimate.
State dp5_step(const DoubleProblem& p, double lambda, double x, const State& y, double h,
               double& err, double rtol, double atol) {
    auto f = [&](double t, const State& s) -> State {
        return {s.v, (p.q(t) - lambda) * s.u + p.N(s.u)};
    };
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    State k1 = f(x, y);
    State k2 = f(x + c2 * h, {y.u + h * (k1.u / 5), y.v + h * (k1.v / 5)});
    State k3 = f(x + c3 * h, {y.u + h * (3 * k1.u / 40 + 9 * k2.u / 40),
                              y.v + h * (3 * k1.v / 40 + 9 * k2.v / 40)});
    State k4 = f(x + c4 * h, {y.u + h * (44 * k1.u / 45 - 56 * k2.u / 15 + 32 * k3.u / 9),
                              y.v + h * (44 * k1.v / 45 - 56 * k2.v / 15 + 32 * k3.v / 9)});
    State k5 = f(x + c5 * h,
                 {y.u + h * (19372 * k1.u / 6561 - 25360 * k2.u / 2187 + 64448 * k3.u / 6561 -
                             212 * k4.u / 729),
                  y.v + h * (19372 * k1.v / 6561 - 25360 * k2.v / 2187 + 64448 * k3.v / 6561 -
                             212 * k4.v / 729)});
    State k6 = f(x + h, {y.u + h * (9017 * k1.u / 3168 - 355 * k2.u / 33 + 46732 * k3.u / 5247 +
                                    49 * k4.u / 176 - 5103 * k5.u / 18656),
                         y.v + h * (9017 * k1.v / 3168 - 355 * k2.v / 33 + 46732 * k3.v / 5247 +
                                    49 * k4.v / 176 - 5103 * k5.v / 18656)});
    State y5{y.u + h * (35 * k1.u / 384 + 500 * k3.u / 1113 + 125 * k4.u / 192 -
                        2187 * k5.u / 6784 + 11 * k6.u / 84),
             y.v + h * (35 * k1.v / 384 + 500 * k3.v / 1113 + 125 * k4.v / 192 -
                        2187 * k5.v / 6784 + 11 * k6.v / 84)};
    State k7 = f(x + h, y5);
    State y4{y.u + h * (5179 * k1.u / 57600 + 7571 * k3.u / 16695 + 393 * k4.u / 640 -
                        92097 * k5.u / 339200 + 187 * k6.u / 2100 + k7.u / 40),
             y.v + h * (5179 * k1.v / 57600 + 7571 * k3.v / 16695 + 393 * k4.v / 640 -
                        92097 * k5.v / 339200 + 187 * k6.v / 2100 + k7.v / 40)};
    double su = atol + rtol * std::max(std::fabs(y.u), std::fabs(y5.u));
    double sv = atol + rtol * std::max(std::fabs(y.v), std::fabs(y5.v));
    double eu = (y5.u - y4.u) / su, ev = (y5.v - y4.v) / sv;
    err = std::sqrt((eu * eu + ev * ev) / 2);
    return y5;
}

void integrate_segment(const DoubleProblem& p, double lambda, double a, double b, State& y,
                       long& steps, double tol) {
    if (b <= a) return;
    double x = a;
    double h = (b - a) / 16;
    while (x < b) {
        h = std::min(h, b - x);
        double err = 0;
        State trial = dp5_step(p, lambda, x, y, h, err, tol, tol);
        ++steps;
        if (err <= 1.0) {
            x += h;
            y = trial;
            h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 1.0, 5.0);
        } else {
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            if (h < 1e-17)
                throw StepUnderflow("shoot: adaptive step collapsed near a singularity");
        }
    }
}

double shoot_impl(const ProblemSpec& spec, double lambda, double tol, long& steps,
                  const std::vector<double>* probes = nullptr,
                  std::vector<double>* probe_values = nullptr) {
    DoubleProblem p = lower(spec);
    if (probes) {
        // probe points become extra (non-singular) boundaries so u is read
        // off exactly there
        for (double x : *probes) {
            auto pos = std::lower_bound(p.boundaries.begin(), p.boundaries.end(), x);
            if (pos != p.boundaries.end() && std::fabs(*pos - x) < 1e-14) continue;
            std::size_t idx = static_cast<std::size_t>(pos - p.boundaries.begin());
            p.boundaries.insert(pos, x);
            p.boundary_singular.insert(p.boundary_singular.begin() + static_cast<long>(idx), false);
        }
        probe_values->assign(probes->size(), 0.0);
    }
    State y{0.0, 1.0};
    for (std::size_t i = 0; i + 1 < p.boundaries.size(); ++i) {
        double a = p.boundaries[i], b = p.boundaries[i + 1];
        double a_eff = a, b_eff = b;
        if (p.boundary_singular[i]) {
            a_eff = a + kSingularOffset;
            double dv = p.sliver_q_integral(a, a_eff, a) * y.u +
                        (-lambda * y.u + p.N(y.u)) * kSingularOffset;
            y.u += kSingularOffset * y.v;
            y.v += dv;
        }
        if (p.boundary_singular[i + 1]) b_eff = b - kSingularOffset;
        integrate_segment(p, lambda, a_eff, b_eff, y, steps, tol);
        if (p.boundary_singular[i + 1]) {
            double dv = p.sliver_q_integral(b_eff, b, b) * y.u +
                        (-lambda * y.u + p.N(y.u)) * kSingularOffset;
            y.u += kSingularOffset * y.v;
            y.v += dv;
        }
        if (std::fabs(b - p.alpha) < 1e-14) y.v += p.beta * y.u;  // delta interaction
        if (probes) {
            for (std::size_t k = 0; k < probes->size(); ++k)
                if (std::fabs((*probes)[k] - b) < 1e-14) (*probe_values)[k] = y.u;
        }
    }
    return y.u;
}

}  // namespace

double shoot(const ProblemSpec& spec, double lambda, double integrator_tol) {
    long steps = 0;
    return shoot_impl(spec, lambda, integrator_tol, steps);
}

std::vector<double> shoot_samples(const ProblemSpec& spec, double lambda,
                                  const std::vector<double>& xs, double integrator_tol) {
    long steps = 0;
    std::vector<double> values;
    shoot_impl(spec, lambda, integrator_tol, steps, &xs, &values);
    return values;
}

ShootingResult find_eigenvalue(const ProblemSpec& spec, double lambda_lo, double lambda_hi,
                               double lambda_tol, double integrator_tol) {
    ShootingResult out;
    long steps = 0;
    double lo = lambda_lo, hi = lambda_hi;
    double flo = shoot_impl(spec, lo, integrator_tol, steps);
    double fhi = shoot_impl(spec, hi, integrator_tol, steps);
    if (flo == 0) {
        out.lambda = lo;
        out.terminal_value = 0;
        out.steps = steps;
        return out;
    }
    if (fhi == 0) {
        out.lambda = hi;
        out.terminal_value = 0;
        out.steps = steps;
        return out;
    }
    if ((flo < 0) == (fhi < 0))
        throw NoSignChange("find_eigenvalue: u(1) has the same sign at both bracket ends");
    while (hi - lo > lambda_tol * 1e-2 * std::max(1.0, std::fabs(hi))) {
        double mid = (lo + hi) / 2;
        if (mid == lo || mid == hi) break;
        double fm = shoot_impl(spec, mid, integrator_tol, steps);
        if (fm == 0) {
            lo = hi = mid;
            flo = fm;
            break;
        }
        if ((flo < 0) == (fm < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    // secant polish inside the bracket
    double x0 = lo, x1 = hi, f0 = flo, f1 = fhi;
    for (int it = 0; it < 8 && f1 != f0; ++it) {
        double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if (!(x2 > lambda_lo && x2 < lambda_hi)) break;
        double f2 = shoot_impl(spec, x2, integrator_tol, steps);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if (std::fabs(f2) < 1e-15) break;
    }
    out.lambda = x1;
    out.terminal_value = f1;
    out.steps = steps;
    out.estimated_error = std::max(hi - lo, std::fabs(x1 - x0));
    return out;
}

}  // namespace fdsl
