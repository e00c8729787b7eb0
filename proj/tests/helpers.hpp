#pragma once

#include "fdsl/problem.hpp"

#include <cstdint>

namespace fdsl::test {

// Deterministic xorshift-based generator so property suites are reproducible
// across platforms and runs.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next() {
        std::uint64_t x = state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        return state = x;
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

// The running example problem: a delta interaction of strength 2 at 1/2, four
// inverse-square-root spikes, and a ninth-power nonlinearity.
inline ProblemSpec spiked_delta_problem(bool with_nonlinearity = true) {
    ProblemSpec spec;
    spec.alpha = Real(1) / 2;
    spec.alpha_exact = Rational{1, 2};
    spec.beta = 2;
    spec.q_terms = {
        InverseSqrtTerm{Real(1), Real("0.7"), Real(1)},
        InverseSqrtTerm{Real(1), Real("0.1"), Real(1)},
        InverseSqrtTerm{Real(1), Real("0.3"), Real(1)},
        InverseSqrtTerm{Real(1), Real("0.4"), Real(2)},
    };
    if (with_nonlinearity) spec.nonlin_coeffs[9] = 1;
    return spec;
}

inline ProblemSpec unperturbed_problem(const Real& alpha, const Real& beta) {
    ProblemSpec spec;
    spec.alpha = alpha;
    spec.beta = beta;
    return spec;
}

}  // namespace fdsl::test
