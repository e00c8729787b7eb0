#include "fdsl/adomian.hpp"

#include "fdsl/errors.hpp"

#include <algorithm>

namespace fdsl {

namespace {

// c := a*b truncated at order k (inclusive).
std::vector<Real> truncated_product(const std::vector<Real>& a, const std::vector<Real>& b,
                                    std::size_t k) {
    std::vector<Real> c(std::min(k + 1, a.size() + b.size() - 1), Real(0));
    for (std::size_t i = 0; i < a.size() && i <= k; ++i) {
        if (a[i] == 0) continue;
        const std::size_t jmax = std::min(b.size(), k + 1 - i);
        for (std::size_t j = 0; j < jmax; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

}  // namespace

PolyCoeffs to_dense(const std::map<unsigned, Real>& coeffs) {
    PolyCoeffs dense;
    for (const auto& [deg, c] : coeffs) {
        if (dense.size() <= deg) dense.resize(deg + 1, Real(0));
        dense[deg] += c;
    }
    return dense;
}

std::vector<Real> adomian_all(const PolyCoeffs& nonlin, const SeriesJet& jet) {
    if (jet.empty()) throw ValidationError("adomian_all: jet must be nonempty");
    const std::size_t k = jet.size() - 1;
    if (nonlin.empty()) return std::vector<Real>(k + 1, Real(0));
    // Horner in the truncated series ring: N(S) with S = sum v_p t^p.
    std::vector<Real> acc{nonlin.back()};
    for (std::size_t d = nonlin.size() - 1; d-- > 0;) {
        acc = truncated_product(acc, jet, k);
        acc[0] += nonlin[d];
    }
    acc.resize(k + 1, Real(0));
    return acc;
}

std::vector<Real> adomian_all(const std::map<unsigned, Real>& nonlin, const SeriesJet& jet) {
    return adomian_all(to_dense(nonlin), jet);
}

bool MajorantNonlinearity::trivial() const {
    for (const auto& c : abs_coeffs)
        if (c != 0) return false;
    return true;
}

PolyCoeffs majorant_shifted(const std::map<unsigned, Real>& nonlin, const Real& s0) {
    if (s0 < 0) throw ValidationError("majorant_shifted: shift must be nonnegative");
    PolyCoeffs out;
    for (const auto& [deg, c] : nonlin) {
        if (out.size() <= deg) out.resize(deg + 1, Real(0));
        // |a_p| (s0 + v)^p expanded binomially: |a_p| C(p,q) s0^(p-q) v^q.
        Real binom = 1;
        Real power = pow(s0, static_cast<int>(deg));
        const Real a = abs(c);
        for (unsigned q = 0; q <= deg; ++q) {
            out[q] += a * binom * power;
            if (q < deg) {
                binom = binom * (deg - q) / (q + 1);
                power = s0 == 0 ? Real(q + 1 == deg ? 1 : 0) : power / s0;
            }
        }
    }
    return out;
}

MajorantNonlinearity make_majorant(const std::map<unsigned, Real>& nonlin, const Real& s0) {
    MajorantNonlinearity m;
    m.abs_coeffs = to_dense(nonlin);
    for (auto& c : m.abs_coeffs) c = abs(c);
    m.shift = s0;
    m.shifted = majorant_shifted(nonlin, s0);
    return m;
}

Real eval_poly_coeffs(const PolyCoeffs& coeffs, const Real& x) {
    Real acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

}  // namespace fdsl
