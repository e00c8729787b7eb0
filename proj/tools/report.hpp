#pragma once

#include "config.hpp"
#include "fdsl/analysis.hpp"
#include "fdsl/shooting.hpp"
#include "fdsl/solver.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fdsl::cli {

struct RunOutcome {
    unsigned n = 0;
    std::optional<FDSolution> solution;
    std::optional<ConvergenceReport> analysis;
    std::optional<ShootingResult> oracle;
    std::string oracle_error;
    std::string error;  ///< nonempty = this eigenpair failed
};

/// Solve every requested eigenpair (optionally in parallel), attaching the
/// a-priori analysis and the optional shooting cross-check. Failures are
/// captured per eigenpair.
std::vector<RunOutcome> execute(const RunConfig& config);

std::string format_table(const RunConfig& config, const std::vector<RunOutcome>& outcomes);
std::string format_analysis(const RunConfig& config, const std::vector<RunOutcome>& outcomes);
std::string format_slopes(const RunConfig& config, const std::vector<RunOutcome>& outcomes);
std::string format_oracle_lines(const std::vector<RunOutcome>& outcomes);
std::string format_plot(const FDSolution& solution);

nlohmann::ordered_json build_report(const RunConfig& config,
                                    const std::vector<RunOutcome>& outcomes);

/// Writes the selected outputs under config.out_dir and prints the human
/// tables to stdout. Returns false when any eigenpair failed.
bool write_outputs(const RunConfig& config, const std::vector<RunOutcome>& outcomes);

nlohmann::ordered_json load_report(const std::string& path);

/// Eigenvalue of entry n re-read from a report at full precision.
Real report_lambda(const nlohmann::ordered_json& report, unsigned n);

}  // namespace fdsl::cli
