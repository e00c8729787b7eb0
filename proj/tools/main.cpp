#include "CLI11.hpp"
#include "config.hpp"
#include "fdsl/errors.hpp"
#include "report.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{
        "fdsl: eigenpairs of -u'' + [beta delta(x-alpha) + q(x)] u + N(u) = lambda u on (0,1)\n"
        "by the functional-discrete method with sinc quadratures"};

    std::string config_path;
    app.add_option("--config", config_path, "problem/run configuration file")->required();

    fdsl::cli::Overrides ov;
    std::string n_list, d, mu, epsilon, out_dir;
    unsigned rank = 0, precision = 0, threads = 0;
    int K = 0;
    std::vector<std::string> emit;
    auto* n_opt = app.add_option("--n", n_list, "eigenpair indices, e.g. 1,2,5 or 1..10");
    auto* rank_opt = app.add_option("--rank", rank, "number of corrections m");
    auto* prec_opt = app.add_option("--precision", precision, "decimal working precision");
    auto* k_opt = app.add_option("--K", K, "fixed sinc grid half-size (skips the search)");
    auto* d_opt = app.add_option("--d", d, "sinc strip parameter d");
    auto* mu_opt = app.add_option("--mu", mu, "sinc decay parameter mu");
    auto* eps_opt = app.add_option("--epsilon", epsilon, "target quadrature accuracy");
    app.add_option("--emit", emit, "outputs: table, report, plot, analysis, slopes")
        ->allow_extra_args(false);
    app.add_flag("--oracle-check", ov.oracle_check, "cross-check against the shooting solver");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* thr_opt = app.add_option("--threads", threads, "parallel solves across n");

    CLI11_PARSE(app, argc, argv);

    if (*n_opt) ov.n_list = n_list;
    if (*rank_opt) ov.rank = rank;
    if (*prec_opt) ov.precision = precision;
    if (*k_opt) ov.K = K;
    if (*d_opt) ov.d = d;
    if (*mu_opt) ov.mu = mu;
    if (*eps_opt) ov.epsilon = epsilon;
    ov.emit = emit;
    if (*out_opt) ov.out_dir = out_dir;
    if (*thr_opt) ov.threads = threads;

    try {
        fdsl::cli::RunConfig config =
            fdsl::cli::make_run_config(fdsl::cli::load_config_tree(config_path), ov);
        std::vector<fdsl::cli::RunOutcome> outcomes = fdsl::cli::execute(config);
        bool ok = fdsl::cli::write_outputs(config, outcomes);
        if (!ok) std::cerr << "some eigenpairs failed; partial results were written\n";
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
