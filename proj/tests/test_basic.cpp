#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fdsl/basic.hpp"
#include "fdsl/errors.hpp"
#include "fdsl/sincquad.hpp"
#include "helpers.hpp"

using namespace fdsl;

namespace {

// Independent root finder: plain bisection on the characteristic, no Newton.
Real bisect_characteristic(unsigned n, const Real& alpha, const Real& beta, const Real& tol) {
    Real lo = pi() * n + pow10(-6), hi = pi() * (n + 1) - pow10(-6);
    const int cells = 4096;
    Real fl = characteristic(lo, alpha, beta);
    Real a = lo, b = lo;
    for (int i = 1; i <= cells; ++i) {
        Real x = lo + (hi - lo) * i / cells;
        Real fx = characteristic(x, alpha, beta);
        if ((fl < 0) != (fx < 0)) {
            a = lo + (hi - lo) * (i - 1) / cells;
            b = x;
            break;
        }
        fl = fx;
    }
    REQUIRE(b > a);
    Real fa = characteristic(a, alpha, beta);
    while (b - a > tol) {
        Real m = (a + b) / 2;
        Real fm = characteristic(m, alpha, beta);
        if (fm == 0) return m;
        if ((fa < 0) == (fm < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return (a + b) / 2;
}

// One-root count by sign scan over [pi n, pi (n+1)), endpoint roots counted
// once (they occur in the resonant case and for beta = 0).
int scan_root_count(unsigned n, const Real& alpha, const Real& beta, bool resonant) {
    const int cells = 2048;
    const Real margin = pow10(-8);
    Real lo = pi() * n + margin, hi = pi() * (n + 1) - margin;
    int count = 0;
    Real fl = characteristic(lo, alpha, beta);
    for (int i = 1; i <= cells; ++i) {
        Real x = lo + (hi - lo) * i / cells;
        Real fx = characteristic(x, alpha, beta);
        if ((fl < 0) != (fx < 0)) ++count;
        fl = fx;
    }
    if ((resonant && beta > 0) || beta == 0) {
        if (abs(characteristic(pi() * n, alpha, beta)) < tolerance(20)) ++count;
    }
    return count;
}

// Generic alpha bounded away from the low-order rationals, where the root
// would collapse into the bracket endpoint (the documented BracketFailure
// case, not a countable root).
Real generic_alpha(fdsl::test::Rng& rng) {
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

}  // namespace

TEST_CASE("characteristic function special values") {
    CHECK(approx_equal(characteristic(pi(), Real(1) / 2, Real(0)), Real(0), tolerance(25)));
    CHECK(approx_equal(characteristic(2 * pi(), Real(1) / 2, Real(2)), Real(0), tolerance(25)));
}

TEST_CASE("characteristic sign agrees with a sign scan on (pi, 2pi)") {
    const Real alpha = Real(1) / 3, beta = 15;
    // locate the single interior root by scanning
    const int cells = 512;
    Real lo = pi() + pow10(-6), hi = 2 * pi() - pow10(-6);
    Real root_lo = 0, root_hi = 0;
    Real fl = characteristic(lo, alpha, beta);
    for (int i = 1; i <= cells; ++i) {
        Real x = lo + (hi - lo) * i / cells;
        Real fx = characteristic(x, alpha, beta);
        if ((fl < 0) != (fx < 0)) {
            root_lo = lo + (hi - lo) * (i - 1) / cells;
            root_hi = x;
            break;
        }
        fl = fx;
    }
    REQUIRE(root_hi > 0);
    // g(4) > 0 and the scan puts the root to the right of 4
    Real g4 = characteristic(Real(4), alpha, beta);
    CHECK(g4 > 0);
    CHECK(root_lo > 4);
}

TEST_CASE("resonant and beta = 0 closed forms") {
    ProblemSpec resonant = test::spiked_delta_problem();
    BasicSolution b2 = solve_basic(resonant, 2);
    CHECK(b2.resonant);
    CHECK(b2.lambda0 == 4 * pi() * pi());
    CHECK(approx_equal(b2.c0, -1 / (2 * pi()), tolerance(40)));
    CHECK(approx_equal(b2.c_tilde, Real(1), tolerance(35)));

    ProblemSpec free_problem = test::unperturbed_problem(Real(1) / 2, Real(0));
    BasicSolution b1 = solve_basic(free_problem, 1);
    CHECK(b1.lambda0 == pi() * pi());
    CHECK(b1.M == Real(1) / 2);
    CHECK(approx_equal(b1.c_tilde, Real(1), tolerance(40)));
}

TEST_CASE("non-resonant root against the bisection oracle") {
    ProblemSpec spec = test::unperturbed_problem(Real(1) / 2, Real(2));
    BasicSolution b1 = solve_basic(spec, 1);
    CHECK(!b1.resonant);
    CHECK(b1.lambda0 > pi() * pi());
    CHECK(b1.lambda0 < 4 * pi() * pi());
    Real oracle_y = bisect_characteristic(1, spec.alpha, spec.beta, Real("1e-30"));
    CHECK(abs(b1.lambda0 - oracle_y * oracle_y) < Real("1e-28"));
    // characteristic residual at the returned root
    CHECK(abs(characteristic(b1.sqrt_lambda0, spec.alpha, spec.beta)) < tolerance(10));
}

TEST_CASE("eval_u0 boundary and midpoint values") {
    ProblemSpec spec = test::unperturbed_problem(Real(1) / 2, Real(0));
    BasicSolution b1 = solve_basic(spec, 1);
    CHECK(eval_u0(b1, Real(0)) == 0);
    CHECK(eval_u0(b1, Real(1)) == 0);
    CHECK(approx_equal(eval_u0(b1, Real(1) / 2), 1 / pi(), tolerance(40)));

    // branch agreement at alpha
    ProblemSpec withdelta = test::unperturbed_problem(Real("0.37"), Real(5));
    BasicSolution b3 = solve_basic(withdelta, 3);
    Real left = sin(b3.sqrt_lambda0 * b3.alpha) / b3.sqrt_lambda0;
    Real right = b3.c0 * sin(b3.sqrt_lambda0 * (1 - b3.alpha));
    CHECK(abs(left - right) < tolerance(10));
}

TEST_CASE("sup norm bound and samples") {
    ProblemSpec spec = test::unperturbed_problem(Real(1) / 2, Real(0));
    BasicSolution b1 = solve_basic(spec, 1);
    CHECK(approx_equal(u0_sup_norm(b1).bound, 1 / pi(), tolerance(40)));
    BasicSolution b3 = solve_basic(spec, 3);
    CHECK(approx_equal(u0_sup_norm(b3).bound, 1 / (3 * pi()), tolerance(40)));

    ProblemSpec spiked = test::spiked_delta_problem();
    BasicSolution s1 = solve_basic(spiked, 1);
    CHECK(approx_equal(u0_sup_norm(s1).bound,
                       std::max(Real(1), sqrt(s1.c_tilde)) / s1.sqrt_lambda0, tolerance(40)));
    CHECK(u0_sup_norm(s1).sampled <= u0_sup_norm(s1).bound + tolerance(10));
}

TEST_CASE("identities for c_tilde and M") {
    test::Rng rng(2024);
    for (int trial = 0; trial < 12; ++trial) {
        Real alpha = Real(rng.range(5, 95)) / 100;
        Real beta = Real(rng.range(0, 200)) / 10;
        unsigned n = static_cast<unsigned>(rng.range(1, 6));
        ProblemSpec spec = test::unperturbed_problem(alpha, beta);
        BasicSolution b = solve_basic(spec, n);

        // c_tilde = lambda0 * c0^2
        CHECK(abs(b.c_tilde - b.lambda0 * b.c0 * b.c0) < tolerance(10));

        // the two published forms of c_tilde agree
        Real y = b.sqrt_lambda0, sa = sin(y * alpha), ca = cos(y * alpha);
        Real expanded = sa * sa + (ca + beta / y * sa) * (ca + beta / y * sa);
        Real simplified = 1 + 2 * beta / y * ca * sa + beta * beta / b.lambda0 * sa * sa;
        CHECK(abs(expanded - simplified) < tolerance(10));
        CHECK(abs(b.c_tilde - simplified) < tolerance(10));
    }
}

TEST_CASE("M equals the quadrature of lambda0 * int u0^2") {
    ProblemSpec spec = test::unperturbed_problem(Real("0.41"), Real(7));
    BasicSolution b = solve_basic(spec, 2);
    CompositeGrid grid = build_composite(spec, 256, quad_default_d(), quad_default_mu());
    GridFunction u0sq = sample(grid, [&](const Real& x) {
        Real u = eval_u0(b, x);
        return u * u;
    });
    CHECK(abs(b.M - b.lambda0 * integrate(grid, u0sq)) < Real("1e-12"));
}

TEST_CASE("M tends to 1/2 and c_tilde to 1 as n grows") {
    ProblemSpec spiked = test::spiked_delta_problem();
    BasicSolution b20 = solve_basic(spiked, 20);
    CHECK(abs(b20.M - Real(1) / 2) < Real("0.1"));
    CHECK(abs(b20.c_tilde - 1) < Real("0.25"));
}

TEST_CASE("theorem-1 style root counting on random data") {
    test::Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        unsigned n = static_cast<unsigned>(rng.range(1, 8));
        ProblemSpec spec;
        bool rational = trial % 4 == 0;
        if (rational) {
            long long den = rng.range(2, 9);
            long long num = rng.range(1, static_cast<int>(den - 1));
            spec.alpha = Real(num) / Real(den);
            spec.alpha_exact = Rational{num, den};
            spec.beta = Real(rng.range(0, 200)) / 10;
        } else {
            spec.alpha = generic_alpha(rng);
            spec.beta = rng.range(0, 9) == 0 ? Real(0) : Real(rng.range(10, 200)) / 10;
        }
        const Real beta = spec.beta;
        bool resonant = spec.resonant(n);
        CHECK(scan_root_count(n, spec.alpha, beta, resonant) == 1);

        BasicSolution b = solve_basic(spec, n);
        CHECK(b.lambda0 >= pi() * pi() * n * n - tolerance(20));
        CHECK(b.lambda0 < pi() * pi() * (n + 1) * (n + 1));
        CHECK(abs(characteristic(b.sqrt_lambda0, spec.alpha, beta)) < tolerance(10));
    }
}

TEST_CASE("the reduced characteristic is increasing between poles") {
    // f(y) = sin(y a) sin(y (1-a)) / sin(y) has positive derivative; checked
    // by central differences at interior samples.
    const Real alpha = Real("0.3");
    auto f = [&](const Real& y) { return sin(y * alpha) * sin(y * (1 - alpha)) / sin(y); };
    const Real h = pow10(-20);
    for (int i = 1; i <= 100; ++i) {
        Real y = 2 * pi() + (pi() * i) / 101;
        Real slope = (f(y + h) - f(y - h)) / (2 * h);
        CHECK(slope > 0);
    }
}

TEST_CASE("bracket failure for a pseudo-resonant alpha") {
    ProblemSpec spec;
    spec.alpha = Real(1) / 2 + pow10(-20);
    spec.beta = 2;
    CHECK(!spec.resonant(2));
    CHECK_THROWS_AS(solve_basic(spec, 2), BracketFailure);
}
