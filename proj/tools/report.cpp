#include "report.hpp"

#include "fdsl/errors.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fdsl::cli {

namespace {

std::string sci(const Real& x) { return x.str(2, std::ios_base::scientific); }

std::string full(const Real& x) { return x.str(0, std::ios_base::fmtflags(0)); }

std::streamsize table_digits() {
    return std::min<std::streamsize>(static_cast<std::streamsize>(working_precision()) - 5, 24);
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

RunOutcome solve_one(const RunConfig& config, unsigned n) {
    RunOutcome outcome;
    outcome.n = n;
    try {
        outcome.solution = run_fd(config.problem, n, solve_options(config));
        outcome.analysis =
            make_convergence_report(config.problem, outcome.solution->basic, config.rank);
        if (config.oracle_check) {
            double center = static_cast<double>(outcome.solution->lambda_m);
            try {
                outcome.oracle = find_eigenvalue(config.problem, center - 2, center + 2, 1e-9);
            } catch (const std::exception& oracle_failure) {
                outcome.oracle_error = oracle_failure.what();
            }
        }
    } catch (const std::exception& failure) {
        outcome.error = failure.what();
    }
    return outcome;
}

}  // namespace

std::vector<RunOutcome> execute(const RunConfig& config) {
    const std::vector<unsigned>& ns = config.n_list;
    std::vector<RunOutcome> outcomes(ns.size());
    const unsigned threads = std::max(1u, config.threads);
    if (threads == 1 || ns.size() == 1) {
        for (std::size_t i = 0; i < ns.size(); ++i) outcomes[i] = solve_one(config, ns[i]);
        return outcomes;
    }
    const unsigned digits = working_precision();
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        set_working_precision(digits);
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= ns.size()) return;
            outcomes[i] = solve_one(config, ns[i]);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, ns.size()); ++t)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return outcomes;
}

std::string format_table(const RunConfig& config, const std::vector<RunOutcome>& outcomes) {
    std::ostringstream out;
    out << pad("n", 4) << pad("m", 4) << pad("lambda", static_cast<std::size_t>(table_digits()) + 8)
        << pad("|u_m|", 12) << pad("|lambda_m|", 12) << pad("r", 12) << pad("Delta", 12) << "\n";
    for (const auto& o : outcomes) {
        if (!o.error.empty()) {
            out << pad(std::to_string(o.n), 4) << "FAILED: " << o.error << "\n";
            continue;
        }
        const FDSolution& sol = *o.solution;
        out << pad(std::to_string(o.n), 4) << pad(std::to_string(config.rank), 4)
            << pad(sol.lambda_m.str(table_digits(), std::ios_base::fmtflags(0)),
                   static_cast<std::size_t>(table_digits()) + 8)
            << pad(sci(sol.sup_u_history.back()), 12)
            << pad(sci(abs(sol.lambda_history.back())), 12) << pad(sci(sol.residual_r), 12)
            << pad(sci(sol.jump_defect), 12) << "\n";
    }
    return out.str();
}

std::string format_analysis(const RunConfig&, const std::vector<RunOutcome>& outcomes) {
    std::ostringstream out;
    out << pad("n", 4) << pad("v0_bar", 12) << pad("R", 14) << pad("r_n", 14)
        << pad("converged", 11) << "bounds(lambda, u)\n";
    for (const auto& o : outcomes) {
        if (!o.error.empty() || !o.analysis) {
            out << pad(std::to_string(o.n), 4) << "FAILED\n";
            continue;
        }
        const ConvergenceReport& rep = *o.analysis;
        out << pad(std::to_string(o.n), 4);
        if (rep.unconditional) {
            out << "unconditional (q = 0 and N = 0: corrections vanish identically)\n";
            continue;
        }
        out << pad(rep.v0_bar.str(5, std::ios_base::fmtflags(0)), 12) << pad(sci(rep.R), 14)
            << pad(rep.r_n.str(5, std::ios_base::fmtflags(0)), 14)
            << pad(rep.converged ? "yes" : "no", 11);
        if (rep.converged)
            out << sci(rep.eigenvalue_bound) << ", " << sci(rep.eigenfunction_bound);
        else
            out << "n/a (a-priori test inconclusive)";
        out << "\n";
    }
    return out.str();
}

std::string format_slopes(const RunConfig&, const std::vector<RunOutcome>& outcomes) {
    std::ostringstream out;
    out << pad("n", 4);
    for (const char* name : {"a_u", "b_u", "e_u", "a_l", "b_l", "e_l", "a_r", "b_r", "e_r"})
        out << pad(name, 9);
    out << "\n";
    for (const auto& o : outcomes) {
        out << pad(std::to_string(o.n), 4);
        if (!o.error.empty()) {
            out << "FAILED\n";
            continue;
        }
        const FDSolution& sol = *o.solution;
        if (sol.residual_history.empty()) {
            out << "n/a (run with the slopes output enabled)\n";
            continue;
        }
        try {
            SlopeTable fits =
                fit_slopes(sol.sup_u_history, sol.lambda_history, sol.residual_history);
            for (const SlopeFit* fit : {&fits.u, &fits.lambda, &fits.r}) {
                out << pad(fit->slope.str(2, std::ios_base::fixed), 9)
                    << pad(fit->intercept.str(2, std::ios_base::fixed), 9)
                    << pad(fit->max_dev.str(2, std::ios_base::fixed), 9);
            }
            out << "\n";
        } catch (const ValidationError&) {
            out << "n/a (vanishing corrections)\n";
        }
    }
    return out.str();
}

std::string format_oracle_lines(const std::vector<RunOutcome>& outcomes) {
    std::ostringstream out;
    for (const auto& o : outcomes) {
        if (!o.error.empty()) continue;
        if (!o.oracle_error.empty()) {
            out << "oracle n=" << o.n << ": FAILED: " << o.oracle_error << "\n";
            continue;
        }
        if (!o.oracle) continue;
        double diff = std::abs(static_cast<double>(o.solution->lambda_m) - o.oracle->lambda);
        std::ostringstream line;
        line.setf(std::ios_base::scientific);
        line.precision(2);
        line << "oracle n=" << o.n << ": lambda=" << o.oracle->lambda << " |diff|=" << diff
             << " steps=" << o.oracle->steps;
        out << line.str() << "\n";
    }
    return out.str();
}

std::string format_plot(const FDSolution& solution) {
    std::ostringstream out;
    out << "x,u,uprime\n";
    const CompositeGrid& grid = *solution.grid;
    for (std::size_t s = 0; s < grid.size(); ++s)
        for (std::size_t i = 0; i < grid.subs[s].size(); ++i)
            out << grid.subs[s].nodes[i].str(17, std::ios_base::fmtflags(0)) << ","
                << solution.u_sum.sub[s][i].str(17, std::ios_base::fmtflags(0)) << ","
                << solution.uprime_sum.sub[s][i].str(17, std::ios_base::fmtflags(0)) << "\n";
    return out.str();
}

nlohmann::ordered_json build_report(const RunConfig& config,
                                    const std::vector<RunOutcome>& outcomes) {
    nlohmann::ordered_json report;
    report["meta"] = {
        {"precision", config.precision},
        {"rank", config.rank},
        {"epsilon", config.epsilon == 0 ? "1e-12" : full(config.epsilon)},
        {"d", config.d == 0 ? full(quad_default_d()) : full(config.d)},
        {"mu", config.mu == 0 ? full(quad_default_mu()) : full(config.mu)},
    };
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& o : outcomes) {
        nlohmann::ordered_json e;
        e["n"] = o.n;
        if (!o.error.empty()) {
            e["status"] = "error";
            e["message"] = o.error;
            entries.push_back(e);
            continue;
        }
        const FDSolution& sol = *o.solution;
        e["status"] = "ok";
        e["K"] = sol.quad.K;
        e["h"] = full(sol.quad.h);
        e["resonant"] = sol.basic.resonant;
        e["lambda0"] = full(sol.basic.lambda0);
        e["c0"] = full(sol.basic.c0);
        e["M"] = full(sol.basic.M);
        e["c_tilde"] = full(sol.basic.c_tilde);
        e["lambda"] = full(sol.lambda_m);
        e["residual"] = full(sol.residual_r);
        e["jump_defect"] = full(sol.jump_defect);
        e["divergence_warning"] = sol.divergence_warning;
        nlohmann::ordered_json corrections = nlohmann::ordered_json::array();
        for (const auto& c : sol.corrections) {
            corrections.push_back({{"j", c.order},
                                   {"lambda_j", full(c.lambda_j)},
                                   {"c_j", full(c.c_j)},
                                   {"sup_u", full(c.sup_abs_u)}});
        }
        e["corrections"] = corrections;
        nlohmann::ordered_json lambda_history = nlohmann::ordered_json::array();
        for (const auto& l : sol.lambda_history) lambda_history.push_back(full(l));
        e["lambda_history"] = lambda_history;
        nlohmann::ordered_json sup_history = nlohmann::ordered_json::array();
        for (const auto& s : sol.sup_u_history) sup_history.push_back(full(s));
        e["sup_u_history"] = sup_history;
        if (!sol.residual_history.empty()) {
            nlohmann::ordered_json history = nlohmann::ordered_json::array();
            for (const auto& r : sol.residual_history) history.push_back(full(r));
            e["residual_history"] = history;
        }
        if (o.analysis) {
            const ConvergenceReport& rep = *o.analysis;
            nlohmann::ordered_json a;
            a["q_norm"] = full(rep.q_norm);
            a["unconditional"] = rep.unconditional;
            a["v0_bar"] = full(rep.v0_bar);
            a["a_n"] = full(rep.a_n);
            a["b_n"] = full(rep.b_n);
            if (!rep.unconditional) {
                a["R"] = full(rep.R);
                a["r_n"] = full(rep.r_n);
            }
            a["converged"] = rep.converged;
            if (rep.converged && !rep.unconditional) {
                a["C_nm"] = full(rep.C_nm);
                a["eigenvalue_bound"] = full(rep.eigenvalue_bound);
                a["eigenfunction_bound"] = full(rep.eigenfunction_bound);
            }
            e["analysis"] = a;
        }
        if (o.oracle) {
            e["oracle"] = {{"lambda", o.oracle->lambda},
                           {"terminal_value", o.oracle->terminal_value},
                           {"steps", o.oracle->steps}};
        } else if (!o.oracle_error.empty()) {
            e["oracle"] = {{"error", o.oracle_error}};
        }
        entries.push_back(e);
    }
    report["results"] = entries;
    return report;
}

bool write_outputs(const RunConfig& config, const std::vector<RunOutcome>& outcomes) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    auto write_file = [&](const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(config.out_dir) / name, std::ios::binary);
        out << content;
    };
    if (config.emit.count("table")) {
        std::string table = format_table(config, outcomes);
        std::cout << table;
        write_file("table.txt", table);
    }
    if (config.emit.count("analysis")) {
        std::string analysis = format_analysis(config, outcomes);
        std::cout << analysis;
        write_file("analysis.txt", analysis);
    }
    if (config.emit.count("slopes")) {
        std::string slopes = format_slopes(config, outcomes);
        std::cout << slopes;
        write_file("slopes.txt", slopes);
    }
    if (config.oracle_check) std::cout << format_oracle_lines(outcomes);
    if (config.emit.count("report"))
        write_file("report.json", build_report(config, outcomes).dump(2) + "\n");
    if (config.emit.count("plot")) {
        for (const auto& o : outcomes)
            if (o.error.empty())
                write_file("plot_n" + std::to_string(o.n) + ".csv", format_plot(*o.solution));
    }
    bool ok = true;
    for (const auto& o : outcomes) ok = ok && o.error.empty();
    return ok;
}

nlohmann::ordered_json load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open report '" + path + "'");
    nlohmann::ordered_json report;
    try {
        in >> report;
    } catch (const std::exception& e) {
        throw ParseError("report '" + path + "': " + e.what());
    }
    return report;
}

Real report_lambda(const nlohmann::ordered_json& report, unsigned n) {
    for (const auto& entry : report.at("results")) {
        if (entry.at("n").get<unsigned>() != n) continue;
        if (entry.at("status").get<std::string>() != "ok")
            throw ValidationError("report entry for n=" + std::to_string(n) + " is an error");
        return real_from_string(entry.at("lambda").get<std::string>());
    }
    throw ValidationError("report has no entry for n=" + std::to_string(n));
}

}  // namespace fdsl::cli
