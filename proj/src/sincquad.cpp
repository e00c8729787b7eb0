#include "fdsl/sincquad.hpp"

#include "fdsl/basic.hpp"
#include "fdsl/errors.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

namespace fdsl {

namespace {

// ---------------------------------------------------------------------------
// Gauss-Legendre rules at the working precision, for the sine-integral
// segments. Nodes by Newton on P_n from the usual cosine seeds.
// ---------------------------------------------------------------------------

struct GaussRule {
    std::vector<Real> nodes;    // on (-1, 1)
    std::vector<Real> weights;
};

// P_n(x) and P_n'(x) via the three-term recurrence.
std::pair<Real, Real> legendre(int n, const Real& x) {
    Real pm1 = 1, p = x;
    for (int k = 2; k <= n; ++k) {
        Real pk = ((2 * k - 1) * x * p - (k - 1) * pm1) / k;
        pm1 = p;
        p = pk;
    }
    Real dp = n * (x * p - pm1) / (x * x - 1);
    return {p, dp};
}

std::shared_ptr<const GaussRule> gauss_rule(int n) {
    static std::mutex mutex;
    static std::map<std::pair<int, unsigned>, std::shared_ptr<const GaussRule>> cache;
    const unsigned digits = working_precision();
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find({n, digits}); it != cache.end()) return it->second;
    }
    auto rule = std::make_shared<GaussRule>();
    rule->nodes.resize(n);
    rule->weights.resize(n);
    const int iterations = 8 + static_cast<int>(digits) / 16;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        Real x = cos(pi() * (4 * i + 3) / (4 * n + 2));
        Real dp = 1;
        for (int it = 0; it < iterations; ++it) {
            auto [p, d] = legendre(n, x);
            dp = d;
            x -= p / d;
        }
        Real w = 2 / ((1 - x * x) * dp * dp);
        rule->nodes[i] = -x;
        rule->weights[i] = w;
        rule->nodes[n - 1 - i] = x;
        rule->weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule->nodes[n / 2] = 0;
    std::lock_guard<std::mutex> lock(mutex);
    return cache.emplace(std::make_pair(n, digits), std::move(rule)).first->second;
}

Real gauss_integrate(const std::function<Real(const Real&)>& f, const Real& a, const Real& b,
                     int n) {
    auto rule = gauss_rule(n);
    Real mid = (a + b) / 2, half = (b - a) / 2;
    Real acc = 0;
    for (int i = 0; i < n; ++i) acc += rule->weights[i] * f(mid + half * rule->nodes[i]);
    return acc * half;
}

Real gauss_adaptive(const std::function<Real(const Real&)>& f, const Real& a, const Real& b) {
    const Real tol = pow10(-static_cast<long>(working_precision() + guard_digits() - 3));
    Real prev = gauss_integrate(f, a, b, 32);
    for (int n = 64; n <= 512; n *= 2) {
        Real cur = gauss_integrate(f, a, b, n);
        if (abs(cur - prev) <= tol * (1 + abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

Real sinc_kernel(const Real& t) { return t == 0 ? Real(1) : sin(t) / t; }

// Si(x) by the alternating power series, valid (and used) for |x| <= 20.
Real si_series(const Real& x) {
    const Real x2 = x * x;
    const Real cutoff = pow10(-static_cast<long>(working_precision() + guard_digits() + 5));
    Real u = x;  // x^(2m+1)/(2m+1)!
    Real total = 0;
    int sign = 1;
    for (int m = 0; m < 4000; ++m) {
        total += sign * u / (2 * m + 1);
        u *= x2 / ((2 * m + 2) * (2 * m + 3));
        sign = -sign;
        if (u < cutoff) break;
    }
    return total;
}

// Si over one segment past the series range.
Real si_segment(const Real& a, const Real& b) { return gauss_adaptive(sinc_kernel, a, b); }

std::shared_ptr<const DeltaTable> build_delta_table(int K) {
    auto table = std::make_shared<DeltaTable>();
    table->K = K;
    table->values.resize(static_cast<std::size_t>(4 * K + 1));
    const Real pi_v = pi();
    // Si(pi*k) cumulatively: series while pi*k <= 20, Gauss segments beyond.
    std::vector<Real> si(static_cast<std::size_t>(2 * K + 1));
    int k_series = std::min(2 * K, 6);  // 6*pi < 20 < 7*pi
    for (int k = 0; k <= k_series; ++k) si[k] = si_series(pi_v * k);
    for (int k = k_series + 1; k <= 2 * K; ++k)
        si[k] = si[k - 1] + si_segment(pi_v * (k - 1), pi_v * k);
    for (int k = 0; k <= 2 * K; ++k) {
        Real d = Real(1) / 2 + si[k] / pi_v;
        table->values[static_cast<std::size_t>(k + 2 * K)] = d;
        table->values[static_cast<std::size_t>(-k + 2 * K)] = 1 - d;
    }
    return table;
}

std::shared_ptr<const DeltaTable> delta_cache_lookup(int K) {
    static std::mutex mutex;
    static std::map<std::pair<int, unsigned>, std::shared_ptr<const DeltaTable>> cache;
    const unsigned digits = working_precision();
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find({K, digits}); it != cache.end()) return it->second;
    }
    auto table = build_delta_table(K);
    std::lock_guard<std::mutex> lock(mutex);
    return cache.emplace(std::make_pair(K, digits), std::move(table)).first->second;
}

// 1/(1 + e^{-t}), keeping full relative precision for t << 0.
Real logistic(const Real& t) {
    if (t >= 0) return 1 / (1 + exp(-t));
    Real e = exp(t);
    return e / (1 + e);
}

CompositeGrid build_composite_impl(const ProblemSpec& spec, int K, const Real& d, const Real& mu,
                                   bool with_stenger) {
    CompositeGrid grid;
    grid.alpha = spec.alpha;
    grid.K = K;
    std::vector<Real> cuts{Real(0)};
    for (const auto& p : spec.split_points()) cuts.push_back(p);
    cuts.push_back(Real(1));
    std::shared_ptr<const DeltaTable> table;
    if (with_stenger) table = delta_cache_lookup(K);
    const Real eps = eps_machine();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        SincGrid sub = build_grid(cuts[i], cuts[i + 1], K, d, mu);
        sub.stenger = table;
        if (cuts[i + 1] <= spec.alpha + eps) grid.left_count = i + 1;
        grid.subs.push_back(std::move(sub));
    }
    grid.h = grid.subs.front().h;
    return grid;
}

// Grids built standalone fetch the shared table per call; composite grids
// carry it from construction.
std::shared_ptr<const DeltaTable> table_for(const SincGrid& grid) {
    return grid.stenger ? grid.stenger : delta_cache_lookup(grid.K);
}

}  // namespace

Real sine_integral(const Real& x) {
    if (x < 0) return -sine_integral(-x);
    if (x <= 20) return si_series(x);
    const Real pi_v = pi();
    // Anchor at the series range, then walk sign-constant half-periods.
    Real total = si_series(20);
    Real t = 20;
    long k = static_cast<long>(ceil(Real(20) / pi_v));
    for (Real edge = pi_v * k; edge < x; edge += pi_v) {
        total += si_segment(t, edge);
        t = edge;
    }
    total += si_segment(t, x);
    return total;
}

std::shared_ptr<const DeltaTable> stenger_coefficients(int K) {
    if (K < 1) throw ValidationError("stenger_coefficients: K must be >= 1");
    return delta_cache_lookup(K);
}

Real quad_default_d() { return pi() / 2; }
Real quad_default_mu() { return Real(1) / 2; }

int max_feasible_K(const Real& d, const Real& mu) {
    // Node-to-endpoint distances decay like exp(-sqrt(pi d K / mu)); keep
    // them at least 8 digits above the underlying precision floor.
    const Real digits = Real(working_precision() + guard_digits()) - 8;
    Real k = digits * digits * log(Real(10)) * log(Real(10)) * mu / (pi() * d);
    return static_cast<int>(k);
}

SincGrid build_grid(const Real& a, const Real& b, int K, const Real& d, const Real& mu) {
    if (K < 1) throw ValidationError("build_grid: K must be >= 1");
    if (!(b > a)) throw ValidationError("build_grid: empty interval");
    SincGrid grid;
    grid.a = a;
    grid.b = b;
    grid.K = K;
    grid.h = sqrt(pi() * d / (mu * K));
    const std::size_t n = static_cast<std::size_t>(2 * K + 1);
    grid.nodes.resize(n);
    grid.weights.resize(n);
    grid.dist_a.resize(n);
    grid.dist_b.resize(n);
    const Real width = b - a;
    for (int j = -K; j <= K; ++j) {
        const std::size_t i = static_cast<std::size_t>(j + K);
        Real t = j * grid.h;
        grid.dist_a[i] = width * logistic(t);
        grid.dist_b[i] = width * logistic(-t);
        if (j < 0)
            grid.nodes[i] = a + grid.dist_a[i];
        else if (j > 0)
            grid.nodes[i] = b - grid.dist_b[i];
        else
            grid.nodes[i] = (a + b) / 2;
        Real den = exp(-t / 2) + exp(t / 2);
        grid.weights[i] = width / (den * den);
    }
    for (std::size_t i = 0; i < n; ++i) {
        bool inside = grid.nodes[i] > a && grid.nodes[i] < b;
        bool ordered = i == 0 || grid.nodes[i - 1] < grid.nodes[i];
        if (!inside || !ordered)
            throw Error("build_grid: nodes degenerate at this precision (K too large for P)");
    }
    return grid;
}

Real definite_integral(const SincGrid& grid, const Samples& f) {
    Real acc = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) acc += f[i] * grid.weights[i];
    return acc * grid.h;
}

Real indefinite_integral(const SincGrid& grid, const Samples& f, int k, Orientation orientation) {
    const std::shared_ptr<const DeltaTable> table_ptr = table_for(grid);
    const DeltaTable& table = *table_ptr;
    const int K = grid.K;
    Real acc = 0;
    for (int j = -K; j <= K; ++j) {
        const std::size_t i = static_cast<std::size_t>(j + K);
        long idx = orientation == Orientation::FromLeft ? (k - j) : (j - k);
        acc += f[i] * grid.weights[i] * table.at(idx);
    }
    return acc * grid.h;
}

Samples indefinite_all(const SincGrid& grid, const Samples& f, Orientation orientation) {
    const std::shared_ptr<const DeltaTable> table_ptr = table_for(grid);
    const DeltaTable& table = *table_ptr;
    const int K = grid.K;
    const std::size_t n = grid.size();
    std::vector<Real> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = f[i] * grid.weights[i];
    Samples out(n);
    const bool from_left = orientation == Orientation::FromLeft;
    // Direct mpfr accumulation: this convolution dominates the solver's
    // runtime and per-term temporaries would double it.
    for (std::size_t p = 0; p < n; ++p) {
        Real acc = 0;
        mpfr_ptr acc_ptr = acc.backend().data();
        const long base = from_left ? static_cast<long>(p) + 2 * K : 2 * K - static_cast<long>(p);
        for (std::size_t j = 0; j < n; ++j) {
            const long idx = from_left ? base - static_cast<long>(j) : base + static_cast<long>(j);
            mpfr_fma(acc_ptr, w[j].backend().data(),
                     table.values[static_cast<std::size_t>(idx)].backend().data(), acc_ptr,
                     MPFR_RNDN);
        }
        out[p] = acc * grid.h;
    }
    return out;
}

CompositeGrid build_composite(const ProblemSpec& spec, int K, const Real& d, const Real& mu) {
    return build_composite_impl(spec, K, d, mu, true);
}

GridFunction GridFunction::zeros(const CompositeGrid& grid) {
    GridFunction f;
    f.sub.resize(grid.size());
    for (std::size_t s = 0; s < grid.size(); ++s)
        f.sub[s].assign(grid.subs[s].size(), Real(0));
    return f;
}

GridFunction sample(const CompositeGrid& grid, const std::function<Real(const Real&)>& f) {
    GridFunction out;
    out.sub.resize(grid.size());
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const SincGrid& g = grid.subs[s];
        out.sub[s].resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) out.sub[s][i] = f(g.nodes[i]);
    }
    return out;
}

GridFunction sample_potential(const CompositeGrid& grid, const ProblemSpec& spec) {
    GridFunction out;
    out.sub.resize(grid.size());
    const Real eps = eps_machine();
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const SincGrid& g = grid.subs[s];
        // Terms singular at one of this subinterval's endpoints are evaluated
        // off the exact node-to-endpoint distances; everything else directly.
        std::vector<const InverseSqrtTerm*> at_a, at_b;
        std::vector<const PotentialTerm*> plain;
        for (const auto& term : spec.q_terms) {
            if (const auto* inv = std::get_if<InverseSqrtTerm>(&term)) {
                Real x0 = inv->abscissa();
                if (abs(x0 - g.a) <= eps) {
                    at_a.push_back(inv);
                    continue;
                }
                if (abs(x0 - g.b) <= eps) {
                    at_b.push_back(inv);
                    continue;
                }
            }
            plain.push_back(&term);
        }
        out.sub[s].resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            Real acc = 0;
            for (const auto* inv : at_a) acc += inv->scale / sqrt(abs(inv->stretch) * g.dist_a[i]);
            for (const auto* inv : at_b) acc += inv->scale / sqrt(abs(inv->stretch) * g.dist_b[i]);
            for (const auto* term : plain) acc += eval_potential_term(*term, g.nodes[i]);
            out.sub[s][i] = acc;
        }
    }
    return out;
}

Real integrate(const CompositeGrid& grid, const GridFunction& f) {
    return integrate_subrange(grid, f, 0, grid.size());
}

Real integrate_subrange(const CompositeGrid& grid, const GridFunction& f, std::size_t first,
                        std::size_t last) {
    Real acc = 0;
    for (std::size_t s = first; s < last; ++s) acc += definite_integral(grid.subs[s], f.sub[s]);
    return acc;
}

Real inner_product_integral(const CompositeGrid& grid, const GridFunction& f,
                            const GridFunction& g) {
    Real acc = 0;
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const SincGrid& sub = grid.subs[s];
        Real part = 0;
        for (std::size_t i = 0; i < sub.size(); ++i)
            part += f.sub[s][i] * g.sub[s][i] * sub.weights[i];
        acc += part * sub.h;
    }
    return acc;
}

Real prefix_integral(const CompositeGrid& grid, const GridFunction& f, NodeRef node) {
    if (node.sub >= grid.size()) throw ValidationError("prefix_integral: subinterval out of range");
    Real acc = 0;
    for (std::size_t s = 0; s < node.sub; ++s) acc += definite_integral(grid.subs[s], f.sub[s]);
    return acc + indefinite_integral(grid.subs[node.sub], f.sub[node.sub], node.j,
                                     Orientation::FromLeft);
}

GridFunction prefix_all(const CompositeGrid& grid, const GridFunction& f) {
    GridFunction out;
    out.sub.resize(grid.size());
    Real base = 0;
    for (std::size_t s = 0; s < grid.size(); ++s) {
        out.sub[s] = indefinite_all(grid.subs[s], f.sub[s], Orientation::FromLeft);
        if (base != 0)
            for (auto& v : out.sub[s]) v += base;
        base += definite_integral(grid.subs[s], f.sub[s]);
    }
    return out;
}

GridFunction suffix_all(const CompositeGrid& grid, const GridFunction& f) {
    GridFunction out;
    out.sub.resize(grid.size());
    Real base = 0;
    for (std::size_t s = grid.size(); s-- > 0;) {
        out.sub[s] = indefinite_all(grid.subs[s], f.sub[s], Orientation::FromRight);
        if (base != 0)
            for (auto& v : out.sub[s]) v += base;
        base += definite_integral(grid.subs[s], f.sub[s]);
    }
    return out;
}

Real adaptive_tanh_integrate_nodes(const std::function<Real(const SincGrid&, std::size_t)>& f,
                                   const Real& a, const Real& b, const Real& rel_tol) {
    const Real d = quad_default_d();
    const Real mu = quad_default_mu();
    const int cap = max_feasible_K(d, mu);
    // The change between successive K estimates the error of the previous
    // value; the returned value is one doubling better. With the tanh rule's
    // exp(-c sqrt(K)) error the doubling raises the error to the power
    // sqrt(2), so accepting once |change| <= tol^0.75 delivers tol.
    const Real accept = exp(Real(3) / 4 * log(rel_tol));
    Real prev = 0;
    bool have_prev = false;
    int K = 32;
    for (;;) {
        SincGrid grid = build_grid(a, b, K, d, mu);
        Real acc = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) acc += f(grid, i) * grid.weights[i];
        acc *= grid.h;
        if (have_prev && abs(acc - prev) <= accept * (1 + abs(acc))) return acc;
        prev = acc;
        have_prev = true;
        if (K >= cap)
            throw Error("adaptive_tanh_integrate: did not stabilize within the feasible K range");
        K = std::min(2 * K, cap);
    }
}

Real adaptive_tanh_integrate(const std::function<Real(const Real&)>& f, const Real& a,
                             const Real& b, const Real& rel_tol) {
    return adaptive_tanh_integrate_nodes(
        [&f](const SincGrid& grid, std::size_t i) { return f(grid.nodes[i]); }, a, b, rel_tol);
}

QuadParams choose_parameters(const ProblemSpec& spec, const BasicSolution& basic,
                             const Real& epsilon, const QuadOptions& options) {
    if (!(epsilon > 0)) throw ValidationError("choose_parameters: epsilon must be positive");
    const Real d = options.d == 0 ? quad_default_d() : options.d;
    const Real mu = options.mu == 0 ? quad_default_mu() : options.mu;
    if (options.fixed_K) {
        SincGrid probe = build_grid(Real(0), Real(1), *options.fixed_K, d, mu);
        return {*options.fixed_K, probe.h};
    }
    const int cap = std::min(options.cap, max_feasible_K(d, mu));
    Real prev = 0;
    bool have_prev = false;
    for (int K = options.start_K; K <= cap; K *= 2) {
        CompositeGrid grid = build_composite_impl(spec, K, d, mu, false);
        GridFunction probe = sample_potential(grid, spec);
        for (std::size_t s = 0; s < grid.size(); ++s)
            for (std::size_t i = 0; i < grid.subs[s].size(); ++i) {
                Real u0 = eval_u0(basic, grid.subs[s].nodes[i]);
                probe.sub[s][i] += u0 + eval_nonlinearity(spec, u0);
            }
        Real value = integrate(grid, probe);
        if (have_prev && abs(value - prev) < epsilon) return {K, grid.h};
        prev = value;
        have_prev = true;
    }
    throw ParameterSearchExhausted(
        "choose_parameters: probe integral did not stabilize before the K cap (" +
        std::to_string(cap) + ")");
}

}  // namespace fdsl
