#include "fdsl/solver.hpp"

#include "fdsl/adomian.hpp"
#include "fdsl/errors.hpp"

#include <atomic>
#include <exception>
#include <thread>

namespace fdsl {

CorrectionEngine::CorrectionEngine(const ProblemSpec& spec, const BasicSolution& basic,
                                   std::shared_ptr<const CompositeGrid> grid)
    : spec_(spec), basic_(basic), grid_(std::move(grid)) {
    const CompositeGrid& g = *grid_;
    q_ = sample_potential(g, spec_);
    const Real y = basic_.sqrt_lambda0;
    sin_z_ = GridFunction::zeros(g);
    cos_z_ = GridFunction::zeros(g);
    sin_1z_ = GridFunction::zeros(g);
    cos_1z_ = GridFunction::zeros(g);
    u0_ = GridFunction::zeros(g);
    u0p_ = GridFunction::zeros(g);
    for (std::size_t s = 0; s < g.size(); ++s) {
        const bool left = s < g.left_count;
        for (std::size_t i = 0; i < g.subs[s].size(); ++i) {
            const Real& z = g.subs[s].nodes[i];
            sin_z_.sub[s][i] = sin(y * z);
            cos_z_.sub[s][i] = cos(y * z);
            sin_1z_.sub[s][i] = sin(y * (1 - z));
            cos_1z_.sub[s][i] = cos(y * (1 - z));
            if (left) {
                u0_.sub[s][i] = sin_z_.sub[s][i] / y;
                u0p_.sub[s][i] = cos_z_.sub[s][i];
            } else {
                u0_.sub[s][i] = basic_.c0 * sin_1z_.sub[s][i];
                u0p_.sub[s][i] = -basic_.c0 * y * cos_1z_.sub[s][i];
            }
        }
    }
    u0_norm_sq_ = inner_product_integral(g, u0_, u0_);
}

GridFunction CorrectionEngine::rhs(unsigned j, const std::vector<Correction>& prior) const {
    if (j < 1 || prior.size() < j - 1)
        throw ValidationError("rhs: corrections up to order j-1 are required");
    const CompositeGrid& g = *grid_;
    GridFunction f = GridFunction::zeros(g);
    const PolyCoeffs nonlin = to_dense(spec_.nonlin_coeffs);
    const bool with_nonlin = !nonlin.empty();
    SeriesJet jet(j);
    for (std::size_t s = 0; s < g.size(); ++s) {
        for (std::size_t i = 0; i < g.subs[s].size(); ++i) {
            const GridFunction& u_prev = (j == 1) ? u0_ : prior[j - 2].u;
            Real val = q_.sub[s][i] * u_prev.sub[s][i];
            for (unsigned p = 1; p <= j - 1; ++p)
                val -= prior[j - p - 1].lambda_j * prior[p - 1].u.sub[s][i];
            if (with_nonlin) {
                jet[0] = u0_.sub[s][i];
                for (unsigned p = 1; p < j; ++p) jet[p] = prior[p - 1].u.sub[s][i];
                val += adomian_all(nonlin, jet)[j - 1];
            }
            f.sub[s][i] = val;
        }
    }
    return f;
}

Real CorrectionEngine::next_lambda(const GridFunction& f_tilde) const {
    return inner_product_integral(*grid_, f_tilde, u0_) / u0_norm_sq_;
}

void CorrectionEngine::subtract_eigenvalue_term(GridFunction& f, const Real& lambda_j) const {
    for (std::size_t s = 0; s < f.sub.size(); ++s)
        for (std::size_t i = 0; i < f.sub[s].size(); ++i)
            f.sub[s][i] -= lambda_j * u0_.sub[s][i];
}

Real CorrectionEngine::next_c(const GridFunction& f) const {
    const CompositeGrid& g = *grid_;
    const Real y = basic_.sqrt_lambda0;
    const Real alpha = basic_.alpha;
    if (basic_.resonant) {
        // Resonant closed form: both the full cosine integral and the
        // beta-weighted sine integral over (0, alpha).
        Real cos_full = inner_product_integral(g, cos_z_, f);
        Real sin_left = 0;
        for (std::size_t s = 0; s < g.left_count; ++s) {
            const SincGrid& sub = g.subs[s];
            Real part = 0;
            for (std::size_t i = 0; i < sub.size(); ++i)
                part += sin_z_.sub[s][i] * f.sub[s][i] * sub.weights[i];
            sin_left += part * sub.h;
        }
        const int sign = basic_.n % 2 == 1 ? 1 : -1;  // (-1)^(n+1)
        return sign * cos_full / y - sign * basic_.beta * sin_left / (y * y);
    }
    Real denom = sin(y * (1 - alpha));
    if (abs(denom) < pow10(-static_cast<long>(working_precision() / 2)))
        throw DegenerateDenominator(
            "next_c: sin(sqrt(lambda0)(1-alpha)) vanishes; the eigenpair was misclassified as "
            "non-resonant");
    Real cos_full = inner_product_integral(g, cos_z_, f);
    Real sin_full = inner_product_integral(g, sin_z_, f);
    return (sin(y * alpha) * cos_full - cos(y * alpha) * sin_full) / (y * denom);
}

Correction CorrectionEngine::next_u(unsigned order, const GridFunction& f, const Real& c_j) const {
    const CompositeGrid& g = *grid_;
    const Real y = basic_.sqrt_lambda0;
    const Real alpha = basic_.alpha;
    Correction out;
    out.order = order;
    out.c_j = c_j;
    out.u = GridFunction::zeros(g);
    out.uprime = GridFunction::zeros(g);

    // Integrands cos(y xi) F and sin(y xi) F, per subinterval.
    GridFunction fc = GridFunction::zeros(g), fs = GridFunction::zeros(g);
    for (std::size_t s = 0; s < g.size(); ++s)
        for (std::size_t i = 0; i < g.subs[s].size(); ++i) {
            fc.sub[s][i] = cos_z_.sub[s][i] * f.sub[s][i];
            fs.sub[s][i] = sin_z_.sub[s][i] * f.sub[s][i];
        }

    // Left of alpha: u = [sin(yz) int_0^z cos F - cos(yz) int_0^z sin F]/y.
    Real base_c = 0, base_s = 0;
    for (std::size_t s = 0; s < g.left_count; ++s) {
        const SincGrid& sub = g.subs[s];
        Samples ic = indefinite_all(sub, fc.sub[s], Orientation::FromLeft);
        Samples is = indefinite_all(sub, fs.sub[s], Orientation::FromLeft);
        for (std::size_t i = 0; i < sub.size(); ++i) {
            Real i1 = base_c + ic[i];
            Real i2 = base_s + is[i];
            out.u.sub[s][i] = (sin_z_.sub[s][i] * i1 - cos_z_.sub[s][i] * i2) / y;
            out.uprime.sub[s][i] = cos_z_.sub[s][i] * i1 + sin_z_.sub[s][i] * i2;
        }
        base_c += definite_integral(sub, fc.sub[s]);
        base_s += definite_integral(sub, fs.sub[s]);
    }
    const Real sin_a = sin(y * alpha), cos_a = cos(y * alpha);
    out.u_alpha_left = (sin_a * base_c - cos_a * base_s) / y;
    out.uprime_alpha_left = cos_a * base_c + sin_a * base_s;

    // Right of alpha: u = c_j sin(y(1-z)) - [sin(yz) int_z^1 cos F
    //                                        - cos(yz) int_z^1 sin F]/y.
    Real tail_c = 0, tail_s = 0;
    for (std::size_t s = g.size(); s-- > g.left_count;) {
        const SincGrid& sub = g.subs[s];
        Samples jc = indefinite_all(sub, fc.sub[s], Orientation::FromRight);
        Samples js = indefinite_all(sub, fs.sub[s], Orientation::FromRight);
        for (std::size_t i = 0; i < sub.size(); ++i) {
            Real j1 = tail_c + jc[i];
            Real j2 = tail_s + js[i];
            out.u.sub[s][i] =
                c_j * sin_1z_.sub[s][i] - (sin_z_.sub[s][i] * j1 - cos_z_.sub[s][i] * j2) / y;
            out.uprime.sub[s][i] =
                -c_j * y * cos_1z_.sub[s][i] - (cos_z_.sub[s][i] * j1 + sin_z_.sub[s][i] * j2);
        }
        tail_c += definite_integral(sub, fc.sub[s]);
        tail_s += definite_integral(sub, fs.sub[s]);
    }
    const Real sin_1a = sin(y * (1 - alpha)), cos_1a = cos(y * (1 - alpha));
    out.u_alpha_right = c_j * sin_1a - (sin_a * tail_c - cos_a * tail_s) / y;
    out.uprime_alpha_right = -c_j * y * cos_1a - (cos_a * tail_c + sin_a * tail_s);

    Real sup = std::max(abs(out.u_alpha_left), abs(out.u_alpha_right));
    for (const auto& samples : out.u.sub)
        for (const auto& v : samples) sup = std::max(sup, abs(v));
    out.sup_abs_u = sup;
    return out;
}

Real CorrectionEngine::u0_grid_sup() const {
    Real sup = abs(eval_u0(basic_, basic_.alpha));
    for (const auto& samples : u0_.sub)
        for (const auto& v : samples) sup = std::max(sup, abs(v));
    return sup;
}

CorrectionEngine::RankState CorrectionEngine::basic_state() const {
    RankState state;
    state.lambda = basic_.lambda0;
    state.u = u0_;
    state.uprime = u0p_;
    const Real y = basic_.sqrt_lambda0;
    state.u_alpha_left = sin(y * basic_.alpha) / y;
    state.u_alpha_right = basic_.c0 * sin(y * (1 - basic_.alpha));
    state.uprime_alpha_left = cos(y * basic_.alpha);
    state.uprime_alpha_right = -basic_.c0 * y * cos(y * (1 - basic_.alpha));
    return state;
}

void CorrectionEngine::accumulate(RankState& state, const Correction& c) const {
    state.lambda += c.lambda_j;
    for (std::size_t s = 0; s < state.u.sub.size(); ++s)
        for (std::size_t i = 0; i < state.u.sub[s].size(); ++i) {
            state.u.sub[s][i] += c.u.sub[s][i];
            state.uprime.sub[s][i] += c.uprime.sub[s][i];
        }
    state.u_alpha_left += c.u_alpha_left;
    state.u_alpha_right += c.u_alpha_right;
    state.uprime_alpha_left += c.uprime_alpha_left;
    state.uprime_alpha_right += c.uprime_alpha_right;
}

Real CorrectionEngine::residual(const RankState& state) const {
    const CompositeGrid& g = *grid_;
    GridFunction inner = GridFunction::zeros(g);
    for (std::size_t s = 0; s < g.size(); ++s)
        for (std::size_t i = 0; i < g.subs[s].size(); ++i) {
            const Real& u = state.u.sub[s][i];
            inner.sub[s][i] =
                q_.sub[s][i] * u - state.lambda * u + eval_nonlinearity(spec_, u);
        }
    GridFunction prefix = prefix_all(g, inner);
    const Real beta_u_alpha = basic_.beta * state.u_alpha();
    Real total = 0;
    for (std::size_t s = 0; s < g.size(); ++s) {
        const SincGrid& sub = g.subs[s];
        const bool left = s < g.left_count;
        Real part = 0;
        for (std::size_t i = 0; i < sub.size(); ++i) {
            Real v = 1 - state.uprime.sub[s][i] + prefix.sub[s][i];
            if (!left) v += beta_u_alpha;
            part += abs(v) * sub.weights[i];
        }
        total += part * sub.h;
    }
    return total;
}

Real CorrectionEngine::jump_defect(const RankState& state) const {
    return state.uprime_alpha_right - state.uprime_alpha_left -
           basic_.beta * state.u_alpha();
}

GridFunction rhs_F(const ProblemSpec& spec, const BasicSolution& basic,
                   const std::vector<Correction>& prior, const CompositeGrid& grid) {
    CorrectionEngine engine(spec, basic, std::make_shared<CompositeGrid>(grid));
    return engine.rhs(static_cast<unsigned>(prior.size()) + 1, prior);
}

Real next_lambda(const ProblemSpec& spec, const BasicSolution& basic, const GridFunction& f_tilde,
                 const CompositeGrid& grid) {
    CorrectionEngine engine(spec, basic, std::make_shared<CompositeGrid>(grid));
    return engine.next_lambda(f_tilde);
}

Real next_c(const ProblemSpec& spec, const BasicSolution& basic, const GridFunction& f,
            const CompositeGrid& grid) {
    CorrectionEngine engine(spec, basic, std::make_shared<CompositeGrid>(grid));
    return engine.next_c(f);
}

Correction next_u(const ProblemSpec& spec, const BasicSolution& basic, const GridFunction& f,
                  const Real& c_j, const CompositeGrid& grid, unsigned order) {
    CorrectionEngine engine(spec, basic, std::make_shared<CompositeGrid>(grid));
    return engine.next_u(order, f, c_j);
}

FDSolution run_fd(const ProblemSpec& spec, unsigned n, const SolveOptions& options) {
    spec.validate();
    FDSolution sol;
    sol.problem = spec;
    sol.basic = solve_basic(spec, n);
    const Real epsilon = options.epsilon > 0 ? options.epsilon : pow10(-12);
    sol.quad = choose_parameters(spec, sol.basic, epsilon, options.quad);
    const Real d = options.quad.d == 0 ? quad_default_d() : options.quad.d;
    const Real mu = options.quad.mu == 0 ? quad_default_mu() : options.quad.mu;
    auto grid = std::make_shared<CompositeGrid>(build_composite(spec, sol.quad.K, d, mu));
    sol.grid = grid;
    CorrectionEngine engine(spec, sol.basic, grid);

    CorrectionEngine::RankState state = engine.basic_state();
    sol.sup_u_history.push_back(engine.u0_grid_sup());
    sol.lambda_history.push_back(sol.basic.lambda0);
    if (options.residual_history) sol.residual_history.push_back(engine.residual(state));

    int growth_streak = 0;
    for (unsigned j = 1; j <= options.rank; ++j) {
        GridFunction f = engine.rhs(j, sol.corrections);
        Real lambda_j = engine.next_lambda(f);
        engine.subtract_eigenvalue_term(f, lambda_j);
        Real c_j = engine.next_c(f);
        Correction corr = engine.next_u(j, f, c_j);
        corr.lambda_j = lambda_j;
        engine.accumulate(state, corr);
        sol.sup_u_history.push_back(corr.sup_abs_u);
        sol.lambda_history.push_back(lambda_j);
        if (options.residual_history) sol.residual_history.push_back(engine.residual(state));

        if (j >= 2 && abs(lambda_j) > abs(sol.corrections.back().lambda_j))
            ++growth_streak;
        else
            growth_streak = 0;
        if (growth_streak >= 3) sol.divergence_warning = true;

        sol.corrections.push_back(std::move(corr));
    }

    sol.lambda_m = state.lambda;
    sol.residual_r = options.residual_history && !sol.residual_history.empty()
                         ? sol.residual_history.back()
                         : engine.residual(state);
    sol.jump_defect = engine.jump_defect(state);
    sol.u_sum = state.u;
    sol.uprime_sum = state.uprime;
    sol.u_alpha = state.u_alpha();
    sol.uprime_alpha_left = state.uprime_alpha_left;
    sol.uprime_alpha_right = state.uprime_alpha_right;
    return sol;
}

namespace {

CorrectionEngine::RankState state_of(const FDSolution& sol, const CorrectionEngine& engine) {
    CorrectionEngine::RankState state = engine.basic_state();
    for (const auto& corr : sol.corrections) engine.accumulate(state, corr);
    return state;
}

}  // namespace

Real residual(const FDSolution& solution) {
    CorrectionEngine engine(solution.problem, solution.basic, solution.grid);
    return engine.residual(state_of(solution, engine));
}

Real jump_defect(const FDSolution& solution) {
    CorrectionEngine engine(solution.problem, solution.basic, solution.grid);
    return engine.jump_defect(state_of(solution, engine));
}

std::vector<FDSolution> run_fd_many(const ProblemSpec& spec, const std::vector<unsigned>& n_list,
                                    const SolveOptions& options, unsigned threads) {
    std::vector<FDSolution> out(n_list.size());
    if (threads <= 1 || n_list.size() <= 1) {
        for (std::size_t i = 0; i < n_list.size(); ++i) out[i] = run_fd(spec, n_list[i], options);
        return out;
    }
    const unsigned digits = working_precision();
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_list.size());
    auto worker = [&]() {
        set_working_precision(digits);
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n_list.size()) return;
            try {
                out[i] = run_fd(spec, n_list[i], options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, n_list.size()); ++t)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace fdsl
