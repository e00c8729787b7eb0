#pragma once

#include "fdsl/problem.hpp"
#include "fdsl/real.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace fdsl {

struct BasicSolution;

/// Sine integral Si(x) = int_0^x sin(t)/t dt. Power series for |x| <= 20,
/// per-half-period adaptive Gauss segments beyond, so that values are
/// reproducible bit for bit at a given precision.
Real sine_integral(const Real& x);

/// Indefinite-integration coefficients delta_k = 1/2 + Si(pi*k)/pi for
/// k = -2K..2K. Symmetry delta_k + delta_{-k} = 1 holds by construction.
struct DeltaTable {
    int K = 0;
    std::vector<Real> values;  // index k + 2K

    const Real& at(long k) const { return values[static_cast<std::size_t>(k + 2 * K)]; }
};

/// Shared, cached per (K, precision).
std::shared_ptr<const DeltaTable> stenger_coefficients(int K);

Real quad_default_d();   // pi/2
Real quad_default_mu();  // 1/2

/// Largest K whose extreme nodes are still representable at the working
/// precision (node-to-endpoint distances decay like exp(-K*h)).
int max_feasible_K(const Real& d, const Real& mu);

/// Sinc grid on (a,b): nodes z_j = (a + b e^{jh})/(1 + e^{jh}) and weights
/// mu_j = (b-a)/(e^{-jh/2} + e^{jh/2})^2 for j = -K..K, h = sqrt(pi d/(mu K)).
/// dist_a/dist_b hold the node-to-endpoint distances computed without
/// cancellation; potential terms singular at an endpoint are evaluated off
/// these.
struct SincGrid {
    Real a, b;
    int K = 0;
    Real h;
    std::vector<Real> nodes;
    std::vector<Real> weights;
    std::vector<Real> dist_a;
    std::vector<Real> dist_b;
    std::shared_ptr<const DeltaTable> stenger;

    std::size_t size() const { return nodes.size(); }
    const Real& node(int j) const { return nodes[static_cast<std::size_t>(j + K)]; }
    const Real& weight(int j) const { return weights[static_cast<std::size_t>(j + K)]; }
};

SincGrid build_grid(const Real& a, const Real& b, int K, const Real& d, const Real& mu);

/// Samples of a function at the nodes of one grid, index j + K.
using Samples = std::vector<Real>;

/// tanh rule: h * sum f(z_j) mu_j.
Real definite_integral(const SincGrid& grid, const Samples& f);

enum class Orientation { FromLeft, FromRight };

/// Stenger's formula at one node: from-left approximates int_a^{z_k} f,
/// from-right approximates int_{z_k}^b f.
Real indefinite_integral(const SincGrid& grid, const Samples& f, int k, Orientation orientation);

/// All nodes at once (the O(K^2) convolution the solver runs in its inner
/// loop).
Samples indefinite_all(const SincGrid& grid, const Samples& f, Orientation orientation);

/// Grids covering (0, alpha) and (alpha, 1), split at the problem's singular
/// abscissae. alpha is always a subinterval endpoint.
struct CompositeGrid {
    std::vector<SincGrid> subs;
    std::size_t left_count = 0;  // subintervals left of alpha
    Real alpha;
    int K = 0;
    Real h;

    std::size_t size() const { return subs.size(); }
};

CompositeGrid build_composite(const ProblemSpec& spec, int K, const Real& d, const Real& mu);

/// Node-aligned samples over a whole composite grid.
struct GridFunction {
    std::vector<Samples> sub;

    static GridFunction zeros(const CompositeGrid& grid);
};

GridFunction sample(const CompositeGrid& grid, const std::function<Real(const Real&)>& f);

/// q at the nodes, evaluating endpoint-singular terms off the stable
/// node-to-endpoint distances.
GridFunction sample_potential(const CompositeGrid& grid, const ProblemSpec& spec);

/// Full integral over (0,1).
Real integrate(const CompositeGrid& grid, const GridFunction& f);

/// Sum of full subinterval integrals for sub in [first, last).
Real integrate_subrange(const CompositeGrid& grid, const GridFunction& f, std::size_t first,
                        std::size_t last);

/// h * sum over nodes of f*g*mu across the whole composite grid.
Real inner_product_integral(const CompositeGrid& grid, const GridFunction& f,
                            const GridFunction& g);

struct NodeRef {
    std::size_t sub = 0;
    int j = 0;  // -K..K
};

/// int_0^{z} f at one node: cached-style sum of the full integrals of all
/// earlier subintervals plus a from-left Stenger integral within the node's
/// own subinterval.
Real prefix_integral(const CompositeGrid& grid, const GridFunction& f, NodeRef node);

/// int_0^{z} f at every node of every subinterval.
GridFunction prefix_all(const CompositeGrid& grid, const GridFunction& f);

/// int_z^1 f at every node (used by the right-hand eigenfunction
/// representation).
GridFunction suffix_all(const CompositeGrid& grid, const GridFunction& f);

/// Composite tanh rule for a scalar function with optional endpoint
/// singularities, doubling K until successive values agree to rel_tol.
Real adaptive_tanh_integrate(const std::function<Real(const Real&)>& f, const Real& a,
                             const Real& b, const Real& rel_tol);

/// Same doubling scheme with a node-aware sampler, for integrands that must
/// be evaluated off the stable node-to-endpoint distances.
Real adaptive_tanh_integrate_nodes(const std::function<Real(const SincGrid&, std::size_t)>& f,
                                   const Real& a, const Real& b, const Real& rel_tol);

struct QuadParams {
    int K = 0;
    Real h;
};

struct QuadOptions {
    std::optional<int> fixed_K;   ///< bypass the a-posteriori search
    Real d = 0;                  ///< 0 = pi/2
    Real mu = 0;                 ///< 0 = 1/2
    int start_K = 32;
    int cap = 1 << 14;
};

/// A-posteriori parameter search: doubles K until the tanh-rule value of the
/// probe integral int_0^1 (q + u0 + N(u0)) stabilizes to within epsilon.
QuadParams choose_parameters(const ProblemSpec& spec, const BasicSolution& basic,
                             const Real& epsilon, const QuadOptions& options = {});

}  // namespace fdsl
