#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fdsl/adomian.hpp"
#include "helpers.hpp"

using namespace fdsl;

namespace {

// Full polynomial expansion of N(sum v_p t^p) without truncation; the
// implementation under test composes in the truncated series ring instead.
std::vector<Real> full_product(const std::vector<Real>& a, const std::vector<Real>& b) {
    std::vector<Real> c(a.size() + b.size() - 1, Real(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

std::vector<Real> brute_force_adomian(const PolyCoeffs& nonlin, const SeriesJet& jet) {
    std::vector<Real> result{Real(0)};
    std::vector<Real> power{Real(1)};
    for (std::size_t d = 0; d < nonlin.size(); ++d) {
        if (d > 0) power = full_product(power, jet);
        if (nonlin[d] == 0) continue;
        if (result.size() < power.size()) result.resize(power.size(), Real(0));
        for (std::size_t i = 0; i < power.size(); ++i) result[i] += nonlin[d] * power[i];
    }
    result.resize(jet.size(), Real(0));
    return result;
}

}  // namespace

TEST_CASE("square nonlinearity expands a series square") {
    Real v0 = Real(3) / 7, v1 = Real(-2) / 5, v2 = Real(11) / 13;
    std::map<unsigned, Real> n2{{2, Real(1)}};
    auto a = adomian_all(n2, {v0, v1, v2});
    CHECK(a.size() == 3);
    CHECK(approx_equal(a[0], v0 * v0));
    CHECK(approx_equal(a[1], 2 * v0 * v1));
    CHECK(approx_equal(a[2], v1 * v1 + 2 * v0 * v2));
}

TEST_CASE("order zero is N(v0)") {
    std::map<unsigned, Real> n9{{9, Real(1)}};
    auto a = adomian_all(n9, {Real(2)});
    CHECK(a.size() == 1);
    CHECK(approx_equal(a[0], Real(512)));
}

TEST_CASE("cubic plus linear on the all-ones jet") {
    std::map<unsigned, Real> n{{3, Real(1)}, {1, Real(2)}};
    auto a = adomian_all(n, {Real(1), Real(1), Real(1), Real(1)});
    REQUIRE(a.size() == 4);
    CHECK(approx_equal(a[0], Real(3)));
    CHECK(approx_equal(a[1], Real(5)));
    CHECK(approx_equal(a[2], Real(8)));
    CHECK(approx_equal(a[3], Real(12)));
}

TEST_CASE("matches brute-force expansion on random polynomials and jets") {
    test::Rng rng(42);
    const Real tol = tolerance(10);
    for (int trial = 0; trial < 30; ++trial) {
        int deg = rng.range(1, 9);
        PolyCoeffs nonlin(deg + 1, Real(0));
        for (int d = 1; d <= deg; ++d)
            if (rng.uniform() < 0.7) nonlin[d] = Real(rng.range(-20, 20)) / 7;
        nonlin[deg] = Real(rng.range(1, 20)) / 3;
        SeriesJet jet(rng.range(1, 12));
        for (auto& v : jet) v = Real(rng.range(-30, 30)) / 11;
        auto got = adomian_all(nonlin, jet);
        auto want = brute_force_adomian(nonlin, jet);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(abs(got[i] - want[i]) <= tol);
    }
}

TEST_CASE("homogeneity for pure powers") {
    test::Rng rng(7);
    std::map<unsigned, Real> n5{{5, Real(1)}};
    SeriesJet jet(6), scaled(6);
    Real c = Real(3) / 2;
    for (std::size_t i = 0; i < jet.size(); ++i) {
        jet[i] = Real(rng.range(-9, 9)) / 4;
        scaled[i] = c * jet[i];
    }
    auto a = adomian_all(n5, jet);
    auto b = adomian_all(n5, scaled);
    Real c5 = pow(c, 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(approx_equal(b[i], c5 * a[i], tolerance(10)));
}

TEST_CASE("nonnegative coefficients and jets give nonnegative polynomials") {
    test::Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        std::map<unsigned, Real> n;
        for (int d = 1; d <= rng.range(1, 6); ++d) n[d] = Real(rng.range(0, 10)) / 3;
        SeriesJet jet(rng.range(1, 8));
        for (auto& v : jet) v = Real(rng.range(0, 12)) / 5;
        for (const auto& a : adomian_all(n, jet)) CHECK(a >= 0);
    }
}

TEST_CASE("majorant shift: trivial and binomial cases") {
    std::map<unsigned, Real> n2{{2, Real(1)}};
    auto zero_shift = majorant_shifted(n2, Real(0));
    REQUIRE(zero_shift.size() == 3);
    CHECK(zero_shift[0] == 0);
    CHECK(zero_shift[1] == 0);
    CHECK(zero_shift[2] == 1);

    auto unit_shift = majorant_shifted(n2, Real(1));
    CHECK(approx_equal(unit_shift[0], Real(1)));
    CHECK(approx_equal(unit_shift[1], Real(2)));
    CHECK(approx_equal(unit_shift[2], Real(1)));
}

TEST_CASE("majorant shift of the ninth power against an independent binomial table") {
    Real s0 = Real(1) / 5;  // the scale of sup|u0| in the running example
    std::map<unsigned, Real> n9{{9, Real(-1)}};  // sign is dropped by the majorant
    auto got = majorant_shifted(n9, s0);
    REQUIRE(got.size() == 10);
    // Pascal's triangle row 9
    std::vector<std::vector<Real>> pascal{{Real(1)}};
    for (int r = 1; r <= 9; ++r) {
        std::vector<Real> row(r + 1, Real(1));
        for (int k = 1; k < r; ++k) row[k] = pascal[r - 1][k - 1] + pascal[r - 1][k];
        pascal.push_back(row);
    }
    for (unsigned q = 0; q <= 9; ++q)
        CHECK(approx_equal(got[q], pascal[9][q] * pow(s0, static_cast<int>(9 - q)), tolerance(10)));

    MajorantNonlinearity m = make_majorant(n9, s0);
    CHECK(approx_equal(m.value_at_zero(), pow(s0, 9)));
    CHECK(approx_equal(m.derivative_at_zero(), 9 * pow(s0, 8)));
    CHECK(!m.trivial());
    CHECK(m.derivative_at_zero() >= 0);
}

TEST_CASE("generating identity: series of Adomian terms reproduces N1(f)") {
    // sum_j A_j(N1; 0, v1, ..., v_j) z^j evaluated as a polynomial in z must
    // equal N1(sum v_p z^p) for polynomial data.
    std::map<unsigned, Real> n{{2, Real(1)}, {3, Real("0.25")}};
    auto n1 = majorant_shifted(n, Real("0.3"));
    SeriesJet v{Real(0), Real("0.7"), Real("0.2"), Real("0.05"), Real("0.0125")};
    auto a = adomian_all(n1, v);
    Real z = Real(1) / 3;
    Real lhs = 0, zp = 1;
    for (std::size_t j = 0; j < a.size(); ++j) {
        lhs += a[j] * zp;
        zp *= z;
    }
    // brute force with full products, evaluated at z
    auto full = brute_force_adomian(n1, v);
    Real rhs = 0;
    zp = 1;
    for (std::size_t j = 0; j < full.size(); ++j) {
        rhs += full[j] * zp;
        zp *= z;
    }
    CHECK(approx_equal(lhs, rhs, tolerance(10)));
}
