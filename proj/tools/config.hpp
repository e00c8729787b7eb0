#pragma once

#include "fdsl/problem.hpp"
#include "fdsl/solver.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fdsl::cli {

/// Parsed value of the sectioned key-value config format: scalars keep their
/// lexeme so numbers can be converted after the precision is known.
struct ConfigValue {
    enum class Kind { String, Number, Boolean, Array, Table };
    Kind kind = Kind::String;
    std::string text;
    bool boolean = false;
    std::vector<ConfigValue> array;
    std::map<std::string, ConfigValue> table;
    int line = 0;
};

/// Sections [problem], [quadrature], [run], each a flat table.
using ConfigTree = std::map<std::string, ConfigValue>;

ConfigTree load_config_tree(const std::string& path);
ConfigTree parse_config_text(const std::string& text, const std::string& origin);

struct RunConfig {
    ProblemSpec problem;
    std::vector<unsigned> n_list{1};
    unsigned rank = 10;
    unsigned precision = 50;
    std::optional<int> K;
    Real d;        // 0 = default
    Real mu;       // 0 = default
    Real epsilon;  // 0 = default 1e-12
    std::set<std::string> emit{"table"};
    bool oracle_check = false;
    std::string out_dir = "out";
    unsigned threads = 1;
};

/// Command-line overrides applied on top of the file.
struct Overrides {
    std::optional<std::string> n_list;  // "1,2,5" or "1..10"
    std::optional<unsigned> rank;
    std::optional<unsigned> precision;
    std::optional<int> K;
    std::optional<std::string> d, mu, epsilon;
    std::vector<std::string> emit;
    bool oracle_check = false;
    std::optional<std::string> out_dir;
    std::optional<unsigned> threads;
};

/// Full pipeline: parse, fix the precision, convert and validate every field.
/// ParseError/ValidationError messages carry the offending location or field.
RunConfig make_run_config(const ConfigTree& tree, const Overrides& overrides);

RunConfig parse_config(const std::string& path);

std::vector<unsigned> parse_n_list(const std::string& text);

SolveOptions solve_options(const RunConfig& config);

}  // namespace fdsl::cli
