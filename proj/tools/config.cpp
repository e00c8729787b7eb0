#include "config.hpp"

#include "fdsl/errors.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace fdsl::cli {

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;
    const std::string& origin;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    char take() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(origin + ":" + std::to_string(line) + ": " + message);
    }

    void skip_ws_and_comments(bool cross_lines) {
        while (!done()) {
            char c = peek();
            if (c == '#') {
                while (!done() && peek() != '\n') take();
            } else if (c == ' ' || c == '\t' || c == '\r' || (cross_lines && c == '\n')) {
                take();
            } else {
                return;
            }
        }
    }
};

bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string parse_key(Cursor& in) {
    in.skip_ws_and_comments(false);
    if (in.done()) in.fail("expected a key");
    if (in.peek() == '"') {
        in.take();
        std::string key;
        while (!in.done() && in.peek() != '"') key.push_back(in.take());
        if (in.done()) in.fail("unterminated quoted key");
        in.take();
        return key;
    }
    std::string key;
    while (!in.done() && is_key_char(in.peek())) key.push_back(in.take());
    if (key.empty()) in.fail("expected a key");
    return key;
}

bool valid_number_lexeme(const std::string& s) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    }
    if (digits == 0) return false;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        std::size_t exp_digits = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++exp_digits;
        if (exp_digits == 0) return false;
    }
    return i == s.size();
}

ConfigValue parse_value(Cursor& in);

ConfigValue parse_inline_table(Cursor& in) {
    ConfigValue value;
    value.kind = ConfigValue::Kind::Table;
    value.line = in.line;
    in.take();  // '{'
    in.skip_ws_and_comments(false);
    if (!in.done() && in.peek() == '}') {
        in.take();
        return value;
    }
    for (;;) {
        std::string key = parse_key(in);
        in.skip_ws_and_comments(false);
        if (in.done() || in.peek() != '=') in.fail("expected '=' inside inline table");
        in.take();
        if (value.table.count(key)) in.fail("duplicate key '" + key + "'");
        value.table.emplace(key, parse_value(in));
        in.skip_ws_and_comments(false);
        if (!in.done() && in.peek() == ',') {
            in.take();
            continue;
        }
        if (!in.done() && in.peek() == '}') {
            in.take();
            return value;
        }
        in.fail("expected ',' or '}' inside inline table");
    }
}

ConfigValue parse_array(Cursor& in) {
    ConfigValue value;
    value.kind = ConfigValue::Kind::Array;
    value.line = in.line;
    in.take();  // '['
    for (;;) {
        in.skip_ws_and_comments(true);
        if (in.done()) in.fail("unterminated array");
        if (in.peek() == ']') {
            in.take();
            return value;
        }
        value.array.push_back(parse_value(in));
        in.skip_ws_and_comments(true);
        if (!in.done() && in.peek() == ',') {
            in.take();
            continue;
        }
        if (!in.done() && in.peek() == ']') {
            in.take();
            return value;
        }
        in.fail("expected ',' or ']' inside array");
    }
}

ConfigValue parse_value(Cursor& in) {
    in.skip_ws_and_comments(false);
    if (in.done()) in.fail("expected a value");
    ConfigValue value;
    value.line = in.line;
    char c = in.peek();
    if (c == '"') {
        in.take();
        value.kind = ConfigValue::Kind::String;
        while (!in.done() && in.peek() != '"') {
            if (in.peek() == '\n') in.fail("unterminated string");
            value.text.push_back(in.take());
        }
        if (in.done()) in.fail("unterminated string");
        in.take();
        return value;
    }
    if (c == '[') return parse_array(in);
    if (c == '{') return parse_inline_table(in);
    std::string token;
    while (!in.done() && (is_key_char(in.peek()) || in.peek() == '+')) token.push_back(in.take());
    if (token == "true" || token == "false") {
        value.kind = ConfigValue::Kind::Boolean;
        value.boolean = token == "true";
        return value;
    }
    if (!valid_number_lexeme(token)) in.fail("not a value: '" + token + "'");
    value.kind = ConfigValue::Kind::Number;
    value.text = token;
    return value;
}

}  // namespace

ConfigTree parse_config_text(const std::string& text, const std::string& origin) {
    Cursor in{text, 0, 1, origin};
    ConfigTree tree;
    ConfigValue* section = nullptr;
    std::string section_name;
    for (;;) {
        in.skip_ws_and_comments(true);
        if (in.done()) return tree;
        if (in.peek() == '[') {
            in.take();
            std::string name = parse_key(in);
            in.skip_ws_and_comments(false);
            if (in.done() || in.peek() != ']') in.fail("expected ']' after section name");
            in.take();
            if (name != "problem" && name != "quadrature" && name != "run")
                in.fail("unknown section [" + name + "]");
            if (tree.count(name)) in.fail("duplicate section [" + name + "]");
            ConfigValue sec;
            sec.kind = ConfigValue::Kind::Table;
            sec.line = in.line;
            section = &tree.emplace(name, std::move(sec)).first->second;
            section_name = name;
            continue;
        }
        if (!section) in.fail("a key appears before any [section] header");
        std::string key = parse_key(in);
        in.skip_ws_and_comments(false);
        if (in.done() || in.peek() != '=') in.fail("expected '=' after key '" + key + "'");
        in.take();
        if (section->table.count(key))
            in.fail("duplicate key '" + key + "' in [" + section_name + "]");
        section->table.emplace(key, parse_value(in));
        in.skip_ws_and_comments(false);
        if (!in.done() && in.peek() != '\n') in.fail("trailing characters after the value");
    }
}

ConfigTree load_config_tree(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_config_text(buffer.str(), path);
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& reason, int line) {
    throw ValidationError(field + " (line " + std::to_string(line) + "): " + reason);
}

Real number_field(const ConfigValue& v, const std::string& field) {
    if (v.kind == ConfigValue::Kind::Number) return real_from_string(v.text);
    if (v.kind == ConfigValue::Kind::String) return real_from_string(v.text);
    field_error(field, "expected a number", v.line);
}

long integer_field(const ConfigValue& v, const std::string& field) {
    if (v.kind != ConfigValue::Kind::Number || v.text.find_first_of(".eE") != std::string::npos)
        field_error(field, "expected an integer", v.line);
    return std::stol(v.text);
}

// "m/n" strings declare exact rationals
std::optional<Rational> rational_of(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) return std::nullopt;
    try {
        Rational r;
        r.num = std::stoll(text.substr(0, slash));
        r.den = std::stoll(text.substr(slash + 1));
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

PotentialTerm term_of(const ConfigValue& v, const std::string& field) {
    if (v.kind != ConfigValue::Kind::Table) field_error(field, "expected a tagged record", v.line);
    auto type_it = v.table.find("type");
    if (type_it == v.table.end()) field_error(field, "missing 'type'", v.line);
    const std::string& type = type_it->second.text;
    if (type == "polynomial") {
        for (const auto& [key, val] : v.table)
            if (key != "type" && key != "coefficients")
                field_error(field + "." + key, "unknown key", val.line);
        PolynomialTerm term;
        auto it = v.table.find("coefficients");
        if (it == v.table.end() || it->second.kind != ConfigValue::Kind::Array)
            field_error(field, "polynomial terms need a 'coefficients' array", v.line);
        for (const auto& c : it->second.array)
            term.coefficients.push_back(number_field(c, field + ".coefficients"));
        return term;
    }
    if (type == "inverse_sqrt") {
        for (const auto& [key, val] : v.table)
            if (key != "type" && key != "scale" && key != "center" && key != "stretch")
                field_error(field + "." + key, "unknown key", val.line);
        InverseSqrtTerm term;
        auto get = [&](const char* name) -> Real {
            auto it = v.table.find(name);
            if (it == v.table.end())
                field_error(field, std::string("inverse_sqrt terms need '") + name + "'", v.line);
            return number_field(it->second, field + "." + name);
        };
        term.scale = get("scale");
        term.center = get("center");
        term.stretch = get("stretch");
        return term;
    }
    field_error(field + ".type", "unknown term type '" + type + "'", v.line);
}

const ConfigValue* find(const ConfigTree& tree, const std::string& section,
                        const std::string& key) {
    auto sec = tree.find(section);
    if (sec == tree.end()) return nullptr;
    auto it = sec->second.table.find(key);
    return it == sec->second.table.end() ? nullptr : &it->second;
}

void reject_unknown_keys(const ConfigTree& tree, const std::string& section,
                         std::initializer_list<const char*> known) {
    auto sec = tree.find(section);
    if (sec == tree.end()) return;
    for (const auto& [key, value] : sec->second.table) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) field_error("[" + section + "] " + key, "unknown key", value.line);
    }
}

}  // namespace

std::vector<unsigned> parse_n_list(const std::string& text) {
    std::vector<unsigned> out;
    auto push_range = [&out](const std::string& item) {
        auto dots = item.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(static_cast<unsigned>(std::stoul(item)));
            } else {
                unsigned lo = static_cast<unsigned>(std::stoul(item.substr(0, dots)));
                unsigned hi = static_cast<unsigned>(std::stoul(item.substr(dots + 2)));
                for (unsigned n = lo; n <= hi; ++n) out.push_back(n);
            }
        } catch (const std::exception&) {
            throw ValidationError("n: cannot parse '" + item + "'");
        }
    };
    std::string item;
    for (char c : text) {
        if (c == ',') {
            if (!item.empty()) push_range(item);
            item.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            item.push_back(c);
        }
    }
    if (!item.empty()) push_range(item);
    if (out.empty()) throw ValidationError("n: the list is empty");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1])
            throw ValidationError("n: indices must be strictly increasing");
    if (out.front() < 1) throw ValidationError("n: indices start at 1");
    return out;
}

RunConfig make_run_config(const ConfigTree& tree, const Overrides& overrides) {
    reject_unknown_keys(tree, "problem", {"alpha", "beta", "q", "nonlinearity", "breakpoints"});
    reject_unknown_keys(tree, "quadrature", {"K", "d", "mu", "epsilon"});
    reject_unknown_keys(tree, "run",
                        {"n", "rank", "precision", "emit", "oracle_check", "out", "threads"});

    RunConfig config;

    // the precision governs every numeric conversion below
    if (const ConfigValue* v = find(tree, "run", "precision"))
        config.precision = static_cast<unsigned>(integer_field(*v, "run.precision"));
    if (overrides.precision) config.precision = *overrides.precision;
    if (config.precision < 16 || config.precision > 10000)
        throw ValidationError("precision: must lie in [16, 10000]");
    set_working_precision(config.precision);

    const ConfigValue* alpha = find(tree, "problem", "alpha");
    if (!alpha) throw ValidationError("alpha: missing from [problem]");
    if (alpha->kind == ConfigValue::Kind::String) {
        if (auto rational = rational_of(alpha->text)) {
            config.problem.alpha_exact = rational;
            if (rational->den == 0) field_error("alpha", "zero denominator", alpha->line);
            config.problem.alpha = Real(rational->num) / Real(rational->den);
        } else {
            config.problem.alpha = number_field(*alpha, "alpha");
        }
    } else {
        config.problem.alpha = number_field(*alpha, "alpha");
    }
    if (const ConfigValue* v = find(tree, "problem", "beta"))
        config.problem.beta = number_field(*v, "beta");
    if (const ConfigValue* v = find(tree, "problem", "q")) {
        if (v->kind != ConfigValue::Kind::Array) field_error("q", "expected an array", v->line);
        for (std::size_t i = 0; i < v->array.size(); ++i)
            config.problem.q_terms.push_back(
                term_of(v->array[i], "q[" + std::to_string(i) + "]"));
    }
    if (const ConfigValue* v = find(tree, "problem", "nonlinearity")) {
        if (v->kind != ConfigValue::Kind::Table)
            field_error("nonlinearity", "expected a degree -> coefficient table", v->line);
        for (const auto& [degree_text, coeff] : v->table) {
            unsigned degree = 0;
            try {
                degree = static_cast<unsigned>(std::stoul(degree_text));
            } catch (const std::exception&) {
                field_error("nonlinearity", "degree '" + degree_text + "' is not an integer",
                            coeff.line);
            }
            config.problem.nonlin_coeffs[degree] =
                number_field(coeff, "nonlinearity." + degree_text);
        }
    }
    if (const ConfigValue* v = find(tree, "problem", "breakpoints")) {
        if (v->kind != ConfigValue::Kind::Array)
            field_error("breakpoints", "expected an array", v->line);
        for (const auto& b : v->array)
            config.problem.breakpoints.push_back(number_field(b, "breakpoints"));
    }

    if (const ConfigValue* v = find(tree, "quadrature", "K"))
        config.K = static_cast<int>(integer_field(*v, "quadrature.K"));
    if (const ConfigValue* v = find(tree, "quadrature", "d"))
        config.d = number_field(*v, "quadrature.d");
    if (const ConfigValue* v = find(tree, "quadrature", "mu"))
        config.mu = number_field(*v, "quadrature.mu");
    if (const ConfigValue* v = find(tree, "quadrature", "epsilon"))
        config.epsilon = number_field(*v, "quadrature.epsilon");

    if (const ConfigValue* v = find(tree, "run", "n")) {
        if (v->kind == ConfigValue::Kind::Array) {
            config.n_list.clear();
            for (const auto& e : v->array)
                config.n_list.push_back(static_cast<unsigned>(integer_field(e, "run.n")));
            if (config.n_list.empty()) field_error("run.n", "the list is empty", v->line);
            for (std::size_t i = 1; i < config.n_list.size(); ++i)
                if (config.n_list[i] <= config.n_list[i - 1])
                    field_error("run.n", "indices must be strictly increasing", v->line);
        } else {
            config.n_list = parse_n_list(v->text);
        }
    }
    if (const ConfigValue* v = find(tree, "run", "rank"))
        config.rank = static_cast<unsigned>(integer_field(*v, "run.rank"));
    if (const ConfigValue* v = find(tree, "run", "emit")) {
        if (v->kind != ConfigValue::Kind::Array) field_error("run.emit", "expected an array", v->line);
        config.emit.clear();
        for (const auto& e : v->array) config.emit.insert(e.text);
    }
    if (const ConfigValue* v = find(tree, "run", "oracle_check")) {
        if (v->kind != ConfigValue::Kind::Boolean)
            field_error("run.oracle_check", "expected true or false", v->line);
        config.oracle_check = v->boolean;
    }
    if (const ConfigValue* v = find(tree, "run", "out")) config.out_dir = v->text;
    if (const ConfigValue* v = find(tree, "run", "threads"))
        config.threads = static_cast<unsigned>(integer_field(*v, "run.threads"));

    // command-line overrides
    if (overrides.n_list) config.n_list = parse_n_list(*overrides.n_list);
    if (overrides.rank) config.rank = *overrides.rank;
    if (overrides.K) config.K = *overrides.K;
    if (overrides.d) config.d = real_from_string(*overrides.d);
    if (overrides.mu) config.mu = real_from_string(*overrides.mu);
    if (overrides.epsilon) config.epsilon = real_from_string(*overrides.epsilon);
    if (!overrides.emit.empty()) config.emit = {overrides.emit.begin(), overrides.emit.end()};
    if (overrides.oracle_check) config.oracle_check = true;
    if (overrides.out_dir) config.out_dir = *overrides.out_dir;
    if (overrides.threads) config.threads = *overrides.threads;

    for (const auto& e : config.emit)
        if (e != "table" && e != "report" && e != "plot" && e != "analysis" && e != "slopes")
            throw ValidationError("emit: unknown output kind '" + e + "'");
    const bool epsilon_given = overrides.epsilon || find(tree, "quadrature", "epsilon");
    if (config.epsilon < 0 || (config.epsilon == 0 && epsilon_given))
        throw ValidationError("epsilon: must be positive");
    if (config.K && *config.K < 4) throw ValidationError("K: must be at least 4");

    config.problem.validate();
    return config;
}

RunConfig parse_config(const std::string& path) {
    return make_run_config(load_config_tree(path), {});
}

SolveOptions solve_options(const RunConfig& config) {
    SolveOptions options;
    options.rank = config.rank;
    options.epsilon = config.epsilon;
    options.quad.fixed_K = config.K;
    options.quad.d = config.d;
    options.quad.mu = config.mu;
    options.residual_history = config.emit.count("slopes") > 0;
    return options;
}

}  // namespace fdsl::cli
