// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier settings than the unit tests; expect a few minutes.

#include "fdsl/adomian.hpp"
#include "fdsl/analysis.hpp"
#include "fdsl/basic.hpp"
#include "fdsl/errors.hpp"
#include "fdsl/problem.hpp"
#include "fdsl/shooting.hpp"
#include "fdsl/sincquad.hpp"
#include "fdsl/solver.hpp"
#include "helpers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace fdsl;

namespace {

struct Outcome {
    std::string label;
    bool pass = false;
    std::string detail;
};

std::vector<Outcome> g_outcomes;

void record(const std::string& label, const std::function<std::string()>& body) {
    Outcome outcome;
    outcome.label = label;
    try {
        outcome.detail = body();
        outcome.pass = outcome.detail.empty();
    } catch (const std::exception& e) {
        outcome.pass = false;
        outcome.detail = std::string("exception: ") + e.what();
    }
    g_outcomes.push_back(outcome);
}

// rank-10 eigenvalues of the running example, as published
const char* kPublishedLambda[10] = {
    "23.437363200234028176652",  "50.879953432153777724296",  "102.294039773949565868154",
    "167.932111361326104363494", "261.703789042290324125067", "365.290665054662412777331",
    "497.311217072847814939907", "642.305601325675356973240", "813.233561353244869046018",
    "995.761252385458344653891"};

std::string check_le(const Real& value, const Real& bound, const std::string& what) {
    if (value <= bound) return "";
    return what + " = " + value.str(4, std::ios_base::scientific) + " exceeds " +
           bound.str(4, std::ios_base::scientific);
}

// ---------------------------------------------------------------------------

std::vector<FDSolution> g_runs;  // the running example, n = 1..10, rank 10
double g_run_seconds = 0;

std::string criterion_table1() {
    ProblemSpec spec = test::spiked_delta_problem();
    SolveOptions opt;
    opt.rank = 10;
    opt.epsilon = Real("1e-12");
    std::vector<unsigned> ns{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    auto t0 = std::chrono::steady_clock::now();
    g_runs = run_fd_many(spec, ns, opt, 2);
    g_run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream detail;
    for (std::size_t i = 0; i < g_runs.size(); ++i) {
        Real diff = abs(g_runs[i].lambda_m - Real(kPublishedLambda[i]));
        if (diff > Real("1e-8"))
            detail << "n=" << i + 1 << " |diff|=" << diff.str(3, std::ios_base::scientific) << " ";
    }
    return detail.str();
}

std::string criterion_diagnostics() {
    if (g_runs.empty()) return "no solutions available";
    std::string r = check_le(g_runs[0].residual_r, Real("1e-8"), "residual(n=1)");
    if (!r.empty()) return r;
    return check_le(abs(g_runs[0].jump_defect), Real("1e-10"), "|jump defect(n=1)|");
}

std::string criterion_analysis_values() {
    ProblemSpec spec = test::spiked_delta_problem();
    std::ostringstream detail;
    Real prev_r = 0;
    for (unsigned n = 1; n <= 10; ++n) {
        const BasicSolution& basic =
            g_runs.size() == 10 ? g_runs[n - 1].basic : solve_basic(spec, n);
        ConvergenceReport rep = make_convergence_report(spec, basic, 10);
        if (n == 1) {
            if (abs(rep.v0_bar - Real("1.8")) > Real("0.05"))
                detail << "v0_bar(1)=" << rep.v0_bar.str(5, std::ios_base::fmtflags(0)) << " ";
            if (abs(rep.R - Real("0.0041")) > Real("0.0041") * Real("0.02"))
                detail << "R(1)=" << rep.R.str(5, std::ios_base::scientific) << " ";
            if (abs(rep.r_n - Real("189.9")) > Real("189.9") * Real("0.01"))
                detail << "r_1=" << rep.r_n.str(6, std::ios_base::fmtflags(0)) << " ";
        } else if (!(rep.r_n < prev_r)) {
            detail << "r_" << n << " not decreasing ";
        }
        prev_r = rep.r_n;
    }
    return detail.str();
}

std::string criterion_slopes() {
    if (g_runs.size() != 10) return "no solutions available";
    const double expected[3] = {-2.4, -3.8, -4.7};
    const unsigned picks[3] = {1, 5, 10};
    double slopes[3] = {0, 0, 0};
    std::ostringstream detail;
    for (int i = 0; i < 3; ++i) {
        const FDSolution& sol = g_runs[picks[i] - 1];
        std::vector<Real> absed;
        for (const auto& l : sol.lambda_history) absed.push_back(abs(l));
        SlopeFit fit = fit_log_line(absed);  // deviations per the max-norm definition
        slopes[i] = static_cast<double>(fit.slope);
        if (std::fabs(slopes[i] - expected[i]) > 0.5)
            detail << "a_lambda(" << picks[i] << ")=" << slopes[i] << " expected near "
                   << expected[i] << "; e=" << static_cast<double>(fit.max_dev) << " ";
    }
    if (!(slopes[2] < slopes[0])) detail << "a_lambda(10) is not below a_lambda(1) ";
    return detail.str();
}

std::string criterion_unperturbed() {
    std::ostringstream detail;
    for (const char* beta : {"0", "2", "15"}) {
        ProblemSpec spec = test::unperturbed_problem(Real(1) / 2, Real(beta));
        spec.alpha_exact = Rational{1, 2};
        for (unsigned n : {1u, 3u}) {
            SolveOptions opt;
            opt.rank = 10;
            FDSolution sol = run_fd(spec, n, opt);
            for (const auto& corr : sol.corrections) {
                if (abs(corr.lambda_j) > tolerance(12) || corr.sup_abs_u > tolerance(12)) {
                    detail << "beta=" << beta << " n=" << n << " corrections do not vanish ";
                    break;
                }
            }
            if (abs(sol.lambda_m - sol.basic.lambda0) > tolerance(12))
                detail << "beta=" << beta << " n=" << n << " lambda drifted ";
            if (spec.beta == 0) {
                Real y = pi() * static_cast<int>(n);
                if (sol.lambda_m != y * y) detail << "beta=0 n=" << n << " lambda != (pi n)^2 ";
            }
        }
    }
    return detail.str();
}

// Generic draws keep alpha away from low-order rationals: right at a
// resonance the root collapses into the bracket endpoint, which is the
// documented BracketFailure condition rather than a countable root. The
// resonant side is exercised by the declared-rational draws.
Real generic_alpha(test::Rng& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        Real alpha = Real(rng.range(51, 949)) / 1000 + Real(rng.range(1, 999)) / 1000000;
        bool ok = true;
        for (int n = 1; n <= 8 && ok; ++n) {
            Real t = alpha * n;
            Real nearest;
            mpfr_round(nearest.backend().data(), t.backend().data());
            ok = abs(t - nearest) > Real("0.02");
        }
        if (ok) return alpha;
    }
    return Real("0.3141");
}

std::string criterion_root_counting() {
    test::Rng rng(20260810);
    int failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
        unsigned n = static_cast<unsigned>(rng.range(1, 8));
        ProblemSpec spec;
        if (trial % 4 == 0) {
            long long den = rng.range(2, 9);
            long long num = rng.range(1, static_cast<int>(den) - 1);
            spec.alpha = Real(num) / Real(den);
            spec.alpha_exact = Rational{num, den};
            spec.beta = Real(rng.range(0, 2000)) / 100;
        } else {
            spec.alpha = generic_alpha(rng);
            spec.beta = rng.range(0, 9) == 0 ? Real(0) : Real(rng.range(10, 2000)) / 100;
        }
        const Real beta = spec.beta;
        const bool resonant = spec.resonant(n);

        // sign scan over (pi n, pi (n+1)) plus the endpoint root in the
        // resonant case
        const int cells = 2048;
        const Real margin = pow10(-8);
        Real lo = pi() * static_cast<int>(n) + margin;
        Real hi = pi() * static_cast<int>(n + 1) - margin;
        int count = 0;
        Real fl = characteristic(lo, spec.alpha, beta);
        for (int i = 1; i <= cells; ++i) {
            Real x = lo + (hi - lo) * i / cells;
            Real fx = characteristic(x, spec.alpha, beta);
            if ((fl < 0) != (fx < 0)) ++count;
            fl = fx;
        }
        if ((resonant && beta > 0) || beta == 0) {
            // the root sits at the bracket endpoint itself
            if (abs(characteristic(pi() * static_cast<int>(n), spec.alpha, beta)) < tolerance(20))
                ++count;
            else
                ++failures;
        }
        if (count != 1) ++failures;
        if (spec.alpha_exact) {
            // the declared rational also pins endpoint roots at multiples of
            // pi*den, for any multiplier
            for (long long k = 1; k <= 2; ++k) {
                Real y = pi() * static_cast<long>(k * spec.alpha_exact->den);
                if (abs(characteristic(y, spec.alpha, beta)) > tolerance(18)) ++failures;
            }
        }

        BasicSolution basic = solve_basic(spec, n);
        if (!(basic.lambda0 >= pi() * pi() * static_cast<int>(n * n) - tolerance(20)) ||
            !(basic.lambda0 < pi() * pi() * static_cast<int>((n + 1) * (n + 1))))
            ++failures;
        if (abs(characteristic(basic.sqrt_lambda0, spec.alpha, beta)) > tolerance(10)) ++failures;
    }
    if (failures == 0) return "";
    return std::to_string(failures) + " of 200 randomized cases failed";
}

std::string criterion_quadrature() {
    auto tanh_error = [](int K) {
        SincGrid g = build_grid(Real(0), Real(1), K, quad_default_d(), quad_default_mu());
        Samples f(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) f[i] = 1 / sqrt(g.dist_a[i]);
        return abs(definite_integral(g, f) - 2);
    };
    Real e64 = tanh_error(64), e256 = tanh_error(256), e1024 = tanh_error(1024);
    auto exponent = [](const Real& e) { return static_cast<double>(log(e) / log(Real(10))); };
    std::ostringstream detail;
    if (!(exponent(e256) <= 2 * exponent(e64) + 3))
        detail << "tanh error at K=256 decays too slowly ";
    if (!(exponent(e1024) <= 2 * exponent(e256) + 3))
        detail << "tanh error at K=1024 decays too slowly ";

    SincGrid g = build_grid(Real(0), Real(1), 400, quad_default_d(), quad_default_mu());
    Samples f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = sin(g.nodes[i]);
    Samples left = indefinite_all(g, f, Orientation::FromLeft);
    Real worst = 0;
    for (int k = -400; k <= 400; ++k) {
        Real exact = 1 - cos(g.node(k));
        worst = std::max(worst, abs(left[static_cast<std::size_t>(k + 400)] - exact));
    }
    std::string s = check_le(worst, Real("1e-10"), "stenger max error for sin at K=400");
    if (!s.empty()) detail << s;
    return detail.str();
}

std::string criterion_adomian() {
    test::Rng rng(777);
    const Real tol = tolerance(10);
    for (int trial = 0; trial < 100; ++trial) {
        int deg = rng.range(1, 9);
        PolyCoeffs nonlin(static_cast<std::size_t>(deg) + 1, Real(0));
        for (int d = 1; d <= deg; ++d)
            if (rng.uniform() < 0.7) nonlin[static_cast<std::size_t>(d)] = Real(rng.range(-20, 20)) / 7;
        nonlin[static_cast<std::size_t>(deg)] = Real(rng.range(1, 20)) / 3;
        SeriesJet jet(static_cast<std::size_t>(rng.range(1, 12)));
        for (auto& v : jet) v = Real(rng.range(-30, 30)) / 11;

        auto got = adomian_all(nonlin, jet);

        // brute force: full products, truncate at the end
        std::vector<Real> result{Real(0)};
        std::vector<Real> power{Real(1)};
        for (std::size_t d = 0; d < nonlin.size(); ++d) {
            if (d > 0) {
                std::vector<Real> next(power.size() + jet.size() - 1, Real(0));
                for (std::size_t i = 0; i < power.size(); ++i)
                    for (std::size_t j = 0; j < jet.size(); ++j) next[i + j] += power[i] * jet[j];
                power = std::move(next);
            }
            if (nonlin[d] == 0) continue;
            if (result.size() < power.size()) result.resize(power.size(), Real(0));
            for (std::size_t i = 0; i < power.size(); ++i) result[i] += nonlin[d] * power[i];
        }
        result.resize(jet.size(), Real(0));
        for (std::size_t i = 0; i < jet.size(); ++i)
            if (abs(got[i] - result[i]) > tol)
                return "trial " + std::to_string(trial) + " coefficient " + std::to_string(i) +
                       " disagrees";
    }
    return "";
}

std::string criterion_oracle() {
    std::ostringstream detail;
    test::Rng rng(4242);
    for (int trial = 0; trial < 10; ++trial) {
        ProblemSpec spec;
        spec.alpha = Real(rng.range(150, 850)) / 1000 + Real(rng.range(1, 999)) / 1000000;
        spec.beta = Real(rng.range(0, 500)) / 100;
        PolynomialTerm poly;
        for (int d = 0; d <= rng.range(1, 3); ++d)
            poly.coefficients.push_back(Real(rng.range(-20, 20)) / 10);
        spec.q_terms = {poly};
        unsigned n = static_cast<unsigned>(rng.range(1, 3));
        SolveOptions opt;
        opt.rank = 8;
        FDSolution sol = run_fd(spec, n, opt);
        double center = static_cast<double>(sol.lambda_m);
        ShootingResult oracle = find_eigenvalue(spec, center - 2, center + 2, 1e-9);
        double diff = std::fabs(center - oracle.lambda);
        if (diff > 1e-5)
            detail << "trial " << trial << " |lambda_fd - lambda_shoot|=" << diff << " ";
    }
    if (g_runs.size() == 10) {
        ProblemSpec spiked = test::spiked_delta_problem();
        ShootingResult oracle = find_eigenvalue(spiked, 20, 30, 1e-9);
        double diff = std::fabs(static_cast<double>(g_runs[0].lambda_m) - oracle.lambda);
        if (diff > 1e-6) detail << "nonlinear example diff=" << diff << " ";
    } else {
        detail << "no stored solutions for the nonlinear cross-check ";
    }
    return detail.str();
}

std::string criterion_bounds() {
    ProblemSpec spec = test::spiked_delta_problem(false);
    for (auto& term : spec.q_terms) {
        auto& inv = std::get<InverseSqrtTerm>(term);
        inv.scale = inv.scale / 100;
    }
    std::ostringstream detail;
    for (unsigned n : {4u, 10u}) {
        SolveOptions opt;
        opt.rank = 12;
        opt.epsilon = Real("1e-12");
        FDSolution sol = run_fd(spec, n, opt);
        ConvergenceReport rep = make_convergence_report(spec, sol.basic, 6);
        if (!rep.converged) {
            detail << "n=" << n << " unexpectedly fails the a-priori test ";
            continue;
        }
        // eigenvalue bounds for m = 1..6 against the rank-12 reference
        Real partial = sol.basic.lambda0;
        std::vector<Real> partial_sums{partial};
        for (const auto& corr : sol.corrections) {
            partial += corr.lambda_j;
            partial_sums.push_back(partial);
        }
        for (unsigned m = 1; m <= 6; ++m) {
            ErrorBounds eb = error_bounds(rep, m);
            Real measured = abs(sol.lambda_m - partial_sums[m]);
            if (measured > eb.eigenvalue)
                detail << "n=" << n << " m=" << m << " bound violated ("
                       << measured.str(3, std::ios_base::scientific) << " > "
                       << eb.eigenvalue.str(3, std::ios_base::scientific) << ") ";
        }
        // majorant domination for every computed order
        auto [a, b] = constants_ab(sol.basic);
        MajorantSeq seq = majorant_sequence(v0_bar(sol.basic), rep.q_norm, nullptr, 12);
        for (const auto& corr : sol.corrections) {
            unsigned j = corr.order;
            Real v_j = b * corr.sup_abs_u / pow(a, static_cast<int>(j));
            Real mu_j = abs(corr.lambda_j) / pow(a, static_cast<int>(j) - 1);
            if (v_j > seq.v[j]) detail << "n=" << n << " j=" << j << " sup-norm majorant violated ";
            if (mu_j > seq.mu[j]) detail << "n=" << n << " j=" << j << " eigenvalue majorant violated ";
        }
    }
    return detail.str();
}

std::string criterion_generating_function() {
    ProblemSpec spec = test::spiked_delta_problem(false);
    BasicSolution basic = solve_basic(spec, 1);
    const Real v0 = v0_bar(basic);
    const Real qn = q_l1_norm(spec);
    const Real R = radius_linear(v0, qn);
    MajorantSeq seq = majorant_sequence(v0, qn, nullptr, 20);

    // Taylor coefficients of the closed form via two binomial series
    Real w1 = 1 + 2 * v0 + 2 * sqrt(v0 * (1 + v0));
    Real w2 = (1 + v0) * qn;
    const unsigned count = 20;
    std::vector<Real> sa(count + 1), sb(count + 1);
    Real binom = 1, ra = 1, rb = 1;
    for (unsigned p = 0; p <= count; ++p) {
        sa[p] = sqrt(w1) * binom * ra;
        sb[p] = binom * rb / sqrt(w1);
        ra *= -w2 / w1;
        rb *= -w1 * w2;
        binom = binom * (Real(1) / 2 - static_cast<int>(p)) / (static_cast<int>(p) + 1);
    }
    std::vector<Real> prod(count + 1, Real(0));
    for (unsigned i = 0; i <= count; ++i)
        for (unsigned j = 0; i + j <= count; ++j) prod[i + j] += sa[i] * sb[j];

    std::ostringstream detail;
    for (unsigned j = 1; j <= count; ++j) {
        Real closed = -prod[j] / 2;
        if (j == 1) closed -= w2 / 2;
        if (abs(seq.v[j] - closed) > Real("1e-12") * abs(closed)) {
            detail << "coefficient " << j << " disagrees with the closed form ";
            break;
        }
    }
    for (unsigned j = 2; j <= count; ++j)
        if (pow(R, static_cast<int>(j)) * seq.v[j] > alpha_coeff(j) * (1 + Real("1e-30"))) {
            detail << "R^j v_j exceeds alpha_j at j=" << j << " ";
            break;
        }
    return detail.str();
}

}  // namespace

int main() {
    set_working_precision(50);

    record("criterion  1: published rank-10 eigenvalues, n=1..10, |error| <= 1e-8",
           criterion_table1);
    record("criterion  2: residual(n=1) <= 1e-8 and |jump defect(n=1)| <= 1e-10",
           criterion_diagnostics);
    record("criterion  3: a-priori table: v0_bar(1), R(1), r_1 and r_n decreasing",
           criterion_analysis_values);
    record("criterion  4: correction-decay slopes a_lambda for n=1,5,10", criterion_slopes);
    record("criterion  5: unperturbed exactness for beta in {0,2,15}", criterion_unperturbed);
    record("criterion  6: one characteristic root per bracket, 200 randomized cases",
           criterion_root_counting);
    record("criterion  7: tanh-rule exponent squaring and stenger accuracy", criterion_quadrature);
    record("criterion  8: adomian terms match brute-force composition, 100 cases",
           criterion_adomian);
    record("criterion  9: shooting oracle agreement (10 random linear + nonlinear example)",
           criterion_oracle);
    record("criterion 10: a-priori bounds dominate measured errors on the scaled problem",
           criterion_bounds);
    record("criterion 11: majorant recursion equals the closed-form series, R^j v_j <= alpha_j",
           criterion_generating_function);

    int failures = 0;
    for (const auto& outcome : g_outcomes) {
        if (outcome.pass) {
            std::printf("PASS  %s\n", outcome.label.c_str());
        } else {
            std::printf("FAIL  %s  [%s]\n", outcome.label.c_str(), outcome.detail.c_str());
            ++failures;
        }
    }
    std::printf("%d of %zu criteria passed (table run: %.0f s)\n",
                static_cast<int>(g_outcomes.size()) - failures, g_outcomes.size(), g_run_seconds);
    return failures == 0 ? 0 : 1;
}
