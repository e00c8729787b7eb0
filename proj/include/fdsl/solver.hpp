#pragma once

#include "fdsl/basic.hpp"
#include "fdsl/problem.hpp"
#include "fdsl/sincquad.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace fdsl {

/// Order-j correction: the eigenvalue increment, the right-branch amplitude,
/// and eigenfunction/derivative samples at every grid node plus the one-sided
/// values at alpha.
struct Correction {
    unsigned order = 0;
    Real lambda_j;
    Real c_j;
    GridFunction u;
    GridFunction uprime;
    Real u_alpha_left, u_alpha_right;
    Real uprime_alpha_left, uprime_alpha_right;
    Real sup_abs_u;
};

struct SolveOptions {
    unsigned rank = 10;
    Real epsilon;  ///< target accuracy for the quadrature parameter search; 0 = 1e-12
    QuadOptions quad;
    bool residual_history = false;  ///< also evaluate the residual at every rank 0..m
};

struct FDSolution {
    ProblemSpec problem;
    BasicSolution basic;
    std::vector<Correction> corrections;  // j = 1..m
    Real lambda_m;                        ///< rank-m eigenvalue
    Real residual_r;
    Real jump_defect;
    std::shared_ptr<const CompositeGrid> grid;
    QuadParams quad;
    bool divergence_warning = false;

    // order-indexed histories, entry 0 = basic problem
    std::vector<Real> sup_u_history;
    std::vector<Real> lambda_history;
    std::vector<Real> residual_history;  // filled when requested

    // assembled rank-m eigenfunction at the nodes
    GridFunction u_sum;
    GridFunction uprime_sum;
    Real u_alpha;  ///< mean of the one-sided values
    Real uprime_alpha_left, uprime_alpha_right;
};

/// Shared per-solve tables (trig values at the nodes, q samples, the
/// normalization integral). The spec-level operations below are thin wrappers
/// over this engine.
class CorrectionEngine {
  public:
    CorrectionEngine(const ProblemSpec& spec, const BasicSolution& basic,
                     std::shared_ptr<const CompositeGrid> grid);

    /// F-tilde: the order-j right-hand side without the -lambda_j*u0 coupling
    /// term.
    GridFunction rhs(unsigned j, const std::vector<Correction>& prior) const;

    /// lambda_j = int F~ u0 / int u0^2 (both by the tanh rule).
    Real next_lambda(const GridFunction& f_tilde) const;

    /// F = F~ - lambda_j u0.
    void subtract_eigenvalue_term(GridFunction& f, const Real& lambda_j) const;

    /// c_j from the continuity equation, or from the resonant closed form.
    Real next_c(const GridFunction& f) const;

    Correction next_u(unsigned order, const GridFunction& f, const Real& c_j) const;

    const CompositeGrid& grid() const { return *grid_; }
    const GridFunction& u0() const { return u0_; }
    const GridFunction& u0_prime() const { return u0p_; }
    const GridFunction& q_samples() const { return q_; }
    Real u0_grid_sup() const;

    /// Running rank-m sums needed by the diagnostics.
    struct RankState {
        Real lambda;
        GridFunction u;
        GridFunction uprime;
        Real u_alpha_left, u_alpha_right;
        Real uprime_alpha_left, uprime_alpha_right;

        Real u_alpha() const { return (u_alpha_left + u_alpha_right) / 2; }
    };

    RankState basic_state() const;
    void accumulate(RankState& state, const Correction& c) const;

    /// Defect functionals of the rank-m approximation.
    Real residual(const RankState& state) const;
    Real jump_defect(const RankState& state) const;

  private:
    const ProblemSpec spec_;
    const BasicSolution basic_;
    std::shared_ptr<const CompositeGrid> grid_;
    GridFunction q_, u0_, u0p_;
    GridFunction sin_z_, cos_z_;    // sin/cos(sqrt(lambda0) * z)
    GridFunction sin_1z_, cos_1z_;  // sin/cos(sqrt(lambda0) * (1 - z))
    Real u0_norm_sq_;               // tanh-rule int u0^2
};

/// Spec-surface wrappers (each builds a throwaway engine; fine for tests and
/// one-off use, run_fd keeps one engine for the whole solve).
GridFunction rhs_F(const ProblemSpec& spec, const BasicSolution& basic,
                   const std::vector<Correction>& prior, const CompositeGrid& grid);
Real next_lambda(const ProblemSpec& spec, const BasicSolution& basic, const GridFunction& f_tilde,
                 const CompositeGrid& grid);
Real next_c(const ProblemSpec& spec, const BasicSolution& basic, const GridFunction& f,
            const CompositeGrid& grid);
Correction next_u(const ProblemSpec& spec, const BasicSolution& basic, const GridFunction& f,
                  const Real& c_j, const CompositeGrid& grid, unsigned order);

/// Full method: basic problem, quadrature parameters, the j = 1..m correction
/// loop, truncated sums and defect diagnostics.
FDSolution run_fd(const ProblemSpec& spec, unsigned n, const SolveOptions& options);

/// Defect functionals recomputed from a stored solution.
Real residual(const FDSolution& solution);
Real jump_defect(const FDSolution& solution);

/// Independent solves for several eigenpair indices, optionally in parallel.
std::vector<FDSolution> run_fd_many(const ProblemSpec& spec, const std::vector<unsigned>& n_list,
                                    const SolveOptions& options, unsigned threads = 1);

}  // namespace fdsl
