#pragma once

#include "fdsl/real.hpp"

#include <map>
#include <vector>

namespace fdsl {

/// Leading coefficients v0..vk of a formal power series in t.
using SeriesJet = std::vector<Real>;

/// Polynomial coefficients indexed by degree (entry 0 = constant term).
using PolyCoeffs = std::vector<Real>;

PolyCoeffs to_dense(const std::map<unsigned, Real>& coeffs);

/// Adomian polynomials A_0..A_k for a polynomial nonlinearity: A_j is the
/// coefficient of t^j in N(sum_p v_p t^p), computed by truncated series
/// composition (Horner in the series ring), which is exact for polynomial N.
std::vector<Real> adomian_all(const PolyCoeffs& nonlin, const SeriesJet& jet);
std::vector<Real> adomian_all(const std::map<unsigned, Real>& nonlin, const SeriesJet& jet);

/// Majorant nonlinearity: coefficients |a_p| of Ntilde together with the
/// shift s0 = sup|u0| defining Ntilde1(v) = Ntilde(s0 + v), and Ntilde1's
/// re-expansion about v = 0.
struct MajorantNonlinearity {
    PolyCoeffs abs_coeffs;  ///< |a_p| by degree
    Real shift;             ///< s0
    PolyCoeffs shifted;     ///< Ntilde1 about 0

    Real value_at_zero() const { return shifted.empty() ? Real(0) : shifted[0]; }
    Real derivative_at_zero() const { return shifted.size() > 1 ? shifted[1] : Real(0); }
    bool trivial() const;
};

/// Exact binomial re-expansion of sum |a_p| (s0 + v)^p about v = 0.
PolyCoeffs majorant_shifted(const std::map<unsigned, Real>& nonlin, const Real& s0);

MajorantNonlinearity make_majorant(const std::map<unsigned, Real>& nonlin, const Real& s0);

Real eval_poly_coeffs(const PolyCoeffs& coeffs, const Real& x);

}  // namespace fdsl
