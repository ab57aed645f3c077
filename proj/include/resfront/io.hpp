#pragma once

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "resfront/certificates.hpp"
#include "resfront/classifier.hpp"
#include "resfront/errors.hpp"
#include "resfront/nonlinearity.hpp"
#include "resfront/phase_plane.hpp"
#include "resfront/semiwave.hpp"
#include "resfront/solver.hpp"
#include "resfront/threshold.hpp"

// Run configuration files (JSON or a TOML subset), CSV inputs, and the
// JSON/CSV shapes of every output.

namespace resfront::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- TOML subset

namespace toml_detail {

class Parser {
public:
    explicit Parser(std::string text) : s_(std::move(text)) {}

    json parse() {
        json root = json::object();
        json* table = &root;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                ++i_;
                if (peek() == '[') fail("arrays of tables are not supported");
                std::vector<std::string> path = key_path(']');
                expect(']');
                end_of_line();
                table = &root;
                for (const auto& k : path) {
                    json& next = (*table)[k];
                    if (next.is_null()) next = json::object();
                    if (!next.is_object()) fail("'" + k + "' is not a table");
                    table = &next;
                }
                continue;
            }
            std::vector<std::string> path = key_path('=');
            expect('=');
            json value = parse_value();
            end_of_line();
            assign(*table, path, std::move(value));
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        int line = 1;
        for (std::size_t k = 0; k < i_ && k < s_.size(); ++k) line += s_[k] == '\n';
        throw ValidationError("config (TOML) line " + std::to_string(line) + ": " + what);
    }

    bool eof() const { return i_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[i_]; }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++i_;
    }

    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++i_;
    }

    void skip_blank_lines() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (peek() == '\n') {
                ++i_;
                continue;
            }
            break;
        }
    }

    // Whitespace, comments and newlines, as allowed inside arrays.
    void skip_all() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (peek() == '\n') ++i_;
            else break;
        }
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++i_;
    }

    void end_of_line() {
        skip_ws();
        skip_comment();
        if (!eof() && peek() != '\n') fail("unexpected trailing characters");
    }

    std::string bare_or_quoted_key() {
        skip_ws();
        if (peek() == '"' || peek() == '\'') return parse_string();
        const std::size_t start = i_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++i_;
        if (i_ == start) fail("expected a key");
        return s_.substr(start, i_ - start);
    }

    std::vector<std::string> key_path(char terminator) {
        std::vector<std::string> path{bare_or_quoted_key()};
        skip_ws();
        while (peek() == '.') {
            ++i_;
            path.push_back(bare_or_quoted_key());
            skip_ws();
        }
        if (peek() != terminator) fail(std::string("expected '") + terminator + "' after key");
        return path;
    }

    void assign(json& table, const std::vector<std::string>& path, json value) {
        json* t = &table;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            json& next = (*t)[path[k]];
            if (next.is_null()) next = json::object();
            if (!next.is_object()) fail("'" + path[k] + "' is not a table");
            t = &next;
        }
        if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
        (*t)[path.back()] = std::move(value);
    }

    std::string parse_string() {
        const char q = peek();
        ++i_;
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            const char c = s_[i_++];
            if (c == q) break;
            if (c == '\\' && q == '"') {
                if (eof()) fail("unterminated escape");
                const char e = s_[i_++];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
        return out;
    }

    json parse_value() {
        skip_ws();
        const char c = peek();
        if (c == '"' || c == '\'') return parse_string();
        if (c == '[') {
            ++i_;
            json arr = json::array();
            skip_all();
            while (peek() != ']') {
                arr.push_back(parse_value());
                skip_all();
                if (peek() == ',') {
                    ++i_;
                    skip_all();
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
            ++i_;
            return arr;
        }
        if (c == '{') {
            ++i_;
            json obj = json::object();
            skip_ws();
            while (peek() != '}') {
                std::vector<std::string> path = key_path('=');
                expect('=');
                assign(obj, path, parse_value());
                skip_ws();
                if (peek() == ',') ++i_;
                else if (peek() != '}') fail("expected ',' or '}' in inline table");
                skip_ws();
            }
            ++i_;
            return obj;
        }
        const std::size_t start = i_;
        while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
               peek() != '}' && peek() != '#')
            ++i_;
        std::string tok = s_.substr(start, i_ - start);
        if (tok == "true") return true;
        if (tok == "false") return false;
        std::string digits;
        for (char ch : tok)
            if (ch != '_') digits += ch;
        if (digits.empty()) fail("expected a value");
        char* end = nullptr;
        const bool integral = digits.find_first_of(".eE") == std::string::npos;
        if (integral) {
            const long long v = std::strtoll(digits.c_str(), &end, 10);
            if (end && *end == '\0') return v;
        }
        const double v = std::strtod(digits.c_str(), &end);
        if (!end || *end != '\0') fail("cannot parse value '" + tok + "'");
        return v;
    }

    std::string s_;
    std::size_t i_ = 0;
};

}  // namespace toml_detail

/// Parses the TOML subset used by run configs: tables, dotted keys, strings,
/// numbers, booleans, arrays and inline tables.
inline json parse_toml(const std::string& text) { return toml_detail::Parser(text).parse(); }

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json load_config(const std::filesystem::path& p) {
    const std::string text = read_text(p);
    const std::string ext = p.extension().string();
    if (ext == ".toml") return parse_toml(text);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        if (ext == ".json") throw ValidationError("config " + p.string() + ": " + e.what());
        return parse_toml(text);
    }
}

/// Numeric rows of a CSV file. Blank lines, '#' comments and rows that do
/// not parse as numbers (headers) are skipped.
inline std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ValidationError("cannot open " + p.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
            if (end == cell.c_str() || (end && *end != '\0')) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (numeric && !row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

// ------------------------------------------------------------ run settings

struct OutputOptions {
    std::string dir;
    bool profiles = false;
};

struct SweepAxes {
    std::vector<double> sigma;
    std::vector<double> alpha;
};

/// Fully resolved configuration of a run.
struct RunSettings {
    json nonlinearity_cfg;
    Nonlinearity nl = Nonlinearity::logistic();
    double alpha = 0.4;
    double h0 = 1.0;
    double sigma = 1.0;
    std::string phi = "cosine";
    RunConfig run;
    ClassifierConfig classifier;
    ThresholdConfig threshold;
    CertificateOptions certificates;
    OutputOptions output;
    SweepAxes sweep;
    int stationary_n = 1000;
    std::filesystem::path base_dir = ".";
};

namespace settings_detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError("'" + where + "' must be a table");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

inline double num(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

inline int integer(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ValidationError(std::string("'") + key + "' must be an integer");
    return v.get<int>();
}

inline bool boolean(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ValidationError(std::string("'") + key + "' must be true or false");
    return v.get<bool>();
}

inline std::vector<double> numbers(const json& obj, const char* key) {
    std::vector<double> out;
    if (!obj.contains(key)) return out;
    const json& v = obj.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ValidationError(std::string("'") + key + "' must be a number or an array of numbers");
    for (const auto& x : v) {
        if (!x.is_number()) throw ValidationError(std::string("'") + key + "' must hold numbers only");
        out.push_back(x.get<double>());
    }
    return out;
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
}

}  // namespace settings_detail

/// Reaction term from its config table.
inline Nonlinearity make_nonlinearity(const json& cfg, const std::filesystem::path& base_dir = ".") {
    using namespace settings_detail;
    check_keys(cfg, "nonlinearity", {"kind", "r", "theta", "domain_cap", "csv"});
    if (!cfg.contains("kind") || !cfg.at("kind").is_string()) throw ValidationError("nonlinearity.kind is required");
    const std::string kind = cfg.at("kind").get<std::string>();
    const double cap = num(cfg, "domain_cap", Nonlinearity::kDefaultDomainCap);
    if (!(cap > 0.0)) throw ValidationError("nonlinearity.domain_cap must be positive");
    if (kind == "logistic") return Nonlinearity::logistic(num(cfg, "r", 1.0), cap);
    if (kind == "cubic_bistable") return Nonlinearity::cubic_bistable(num(cfg, "theta", 0.25), cap);
    if (kind == "zero") return Nonlinearity::zero(cap);
    if (kind == "tabulated") {
        if (!cfg.contains("csv")) throw ValidationError("tabulated nonlinearity needs 'csv'");
        const auto rows = read_csv_rows(resolve(base_dir, cfg.at("csv").get<std::string>()));
        std::vector<TableNode> nodes;
        for (const auto& r : rows) {
            if (r.size() != 3) throw ValidationError("tabulated nonlinearity rows must be u,f,fprime");
            nodes.push_back({r[0], r[1], r[2]});
        }
        auto nl = Nonlinearity::tabulated(std::move(nodes));
        if (cfg.contains("domain_cap")) nl = nl.with_domain_cap(cap);
        return nl;
    }
    throw ValidationError("unknown nonlinearity kind '" + kind + "'");
}

/// Builds a RunSettings from a parsed config; every key is checked against the
/// known schema so that misspellings fail loudly.
inline RunSettings parse_settings(const json& cfg, const std::filesystem::path& base_dir = ".") {
    using namespace settings_detail;
    check_keys(cfg, "config", {"nonlinearity", "alpha", "h0", "sigma", "phi", "n", "scheme", "tolerances", "horizons",
                               "output", "output_dir", "classifier", "threshold", "certificates", "sweep",
                               "stationary"});
    RunSettings s;
    s.base_dir = base_dir;
    s.nonlinearity_cfg = cfg.contains("nonlinearity") ? cfg.at("nonlinearity") : json{{"kind", "logistic"}, {"r", 1.0}};
    s.nl = make_nonlinearity(s.nonlinearity_cfg, base_dir);
    s.alpha = num(cfg, "alpha", s.alpha);
    s.h0 = num(cfg, "h0", s.h0);
    s.sigma = num(cfg, "sigma", s.sigma);
    if (cfg.contains("phi")) {
        if (!cfg.at("phi").is_string()) throw ValidationError("'phi' must be \"cosine\" or a CSV path");
        s.phi = cfg.at("phi").get<std::string>();
    }
    s.run.n = integer(cfg, "n", s.run.n);

    if (cfg.contains("scheme")) {
        const json& t = cfg.at("scheme");
        check_keys(t, "scheme", {"predictor_corrector", "regrid", "n_max", "dx_max", "dx_min", "widen_cap"});
        s.run.predictor_corrector = boolean(t, "predictor_corrector", s.run.predictor_corrector);
        s.run.regrid = boolean(t, "regrid", s.run.regrid);
        s.run.n_max = integer(t, "n_max", s.run.n_max);
        s.run.dx_max = num(t, "dx_max", s.run.dx_max);
        s.run.dx_min = num(t, "dx_min", s.run.dx_min);
        s.run.widen_cap = boolean(t, "widen_cap", s.run.widen_cap);
    }
    if (cfg.contains("tolerances")) {
        const json& t = cfg.at("tolerances");
        check_keys(t, "tolerances", {"eps_shrink", "eps_vanish", "cfl", "move_frac", "dt_max", "dt_min", "dt_fixed",
                                     "tol_bound", "tol_monotone"});
        s.run.eps_shrink = num(t, "eps_shrink", s.run.eps_shrink);
        s.run.eps_vanish = num(t, "eps_vanish", s.run.eps_vanish);
        s.run.cfl = num(t, "cfl", s.run.cfl);
        s.run.move_frac = num(t, "move_frac", s.run.move_frac);
        s.run.dt_max = num(t, "dt_max", s.run.dt_max);
        s.run.dt_min = num(t, "dt_min", s.run.dt_min);
        s.run.dt_fixed = num(t, "dt_fixed", s.run.dt_fixed);
        s.run.tol_bound = num(t, "tol_bound", s.run.tol_bound);
        s.run.tol_monotone = num(t, "tol_monotone", s.run.tol_monotone);
    }
    if (cfg.contains("horizons")) {
        const json& t = cfg.at("horizons");
        check_keys(t, "horizons", {"t_horizon", "x_max", "record_every", "checkpoint_every", "checkpoint_times",
                                   "stall_stop", "stall_window"});
        s.run.t_horizon = num(t, "t_horizon", s.run.t_horizon);
        s.run.x_max = num(t, "x_max", s.run.x_max);
        s.run.record_every = num(t, "record_every", s.run.record_every);
        s.run.checkpoint_every = num(t, "checkpoint_every", s.run.checkpoint_every);
        s.run.checkpoint_times = numbers(t, "checkpoint_times");
        s.run.stall_stop = boolean(t, "stall_stop", s.run.stall_stop);
        s.run.stall_window = num(t, "stall_window", s.run.stall_window);
    }
    if (cfg.contains("classifier")) {
        const json& t = cfg.at("classifier");
        check_keys(t, "classifier", {"equiv_window", "tail_fraction", "speed_match", "plateau_tol", "width_tol",
                                     "profile_tol", "eps_stall", "center_slack_dx"});
        auto& c = s.classifier;
        c.equiv_window = num(t, "equiv_window", c.equiv_window);
        c.tail_fraction = num(t, "tail_fraction", c.tail_fraction);
        c.speed_match = num(t, "speed_match", c.speed_match);
        c.plateau_tol = num(t, "plateau_tol", c.plateau_tol);
        c.width_tol = num(t, "width_tol", c.width_tol);
        c.profile_tol = num(t, "profile_tol", c.profile_tol);
        c.eps_stall = num(t, "eps_stall", c.eps_stall);
        c.center_slack_dx = num(t, "center_slack_dx", c.center_slack_dx);
    }
    s.run.eps_stall = s.classifier.eps_stall;
    if (cfg.contains("threshold")) {
        const json& t = cfg.at("threshold");
        check_keys(t, "threshold", {"tol", "midpoint_tol", "sigma_start", "sigma_cap", "sigma_floor",
                                    "max_horizon_doublings", "midpoint_stall_window"});
        auto& c = s.threshold;
        c.tol = num(t, "tol", c.tol);
        c.midpoint_tol = num(t, "midpoint_tol", c.midpoint_tol);
        c.sigma_start = num(t, "sigma_start", c.sigma_start);
        c.sigma_cap = num(t, "sigma_cap", c.sigma_cap);
        c.sigma_floor = num(t, "sigma_floor", c.sigma_floor);
        c.max_horizon_doublings = integer(t, "max_horizon_doublings", c.max_horizon_doublings);
        c.midpoint_stall_window = num(t, "midpoint_stall_window", c.midpoint_stall_window);
    }
    if (cfg.contains("certificates")) {
        const json& t = cfg.at("certificates");
        check_keys(t, "certificates", {"critical_tol", "plateau_shifts", "plateau_table"});
        s.certificates.critical_tol = num(t, "critical_tol", s.certificates.critical_tol);
        s.certificates.plateau_shifts = integer(t, "plateau_shifts", s.certificates.plateau_shifts);
        s.certificates.plateau_table = integer(t, "plateau_table", s.certificates.plateau_table);
    }
    if (cfg.contains("output")) {
        const json& t = cfg.at("output");
        check_keys(t, "output", {"dir", "profiles"});
        if (t.contains("dir")) s.output.dir = t.at("dir").get<std::string>();
        s.output.profiles = boolean(t, "profiles", s.output.profiles);
    }
    if (cfg.contains("output_dir")) s.output.dir = cfg.at("output_dir").get<std::string>();
    if (cfg.contains("sweep")) {
        const json& t = cfg.at("sweep");
        check_keys(t, "sweep", {"sigma", "alpha"});
        s.sweep.sigma = numbers(t, "sigma");
        s.sweep.alpha = numbers(t, "alpha");
    }
    if (cfg.contains("stationary")) {
        const json& t = cfg.at("stationary");
        check_keys(t, "stationary", {"n"});
        s.stationary_n = integer(t, "n", s.stationary_n);
    }
    s.threshold.run = s.run;
    s.threshold.classifier = s.classifier;

    if (!(s.alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (!(s.h0 > 0.0)) throw ValidationError("h0 must be positive");
    if (!(s.sigma > 0.0)) throw ValidationError("sigma must be positive");
    if (s.run.n < 4) throw ValidationError("n must be at least 4");
    if (!(s.run.t_horizon > 0.0)) throw ValidationError("horizons.t_horizon must be positive");
    return s;
}

inline RunSettings load_settings(const std::filesystem::path& p) {
    return parse_settings(load_config(p), p.has_parent_path() ? p.parent_path() : std::filesystem::path("."));
}

/// The settings as a JSON document with every default filled in.
inline json resolved(const RunSettings& s) {
    const auto& r = s.run;
    const auto& c = s.classifier;
    const auto& t = s.threshold;
    json j;
    j["nonlinearity"] = s.nonlinearity_cfg;
    j["alpha"] = s.alpha;
    j["h0"] = s.h0;
    j["sigma"] = s.sigma;
    j["phi"] = s.phi;
    j["n"] = r.n;
    j["scheme"] = {{"predictor_corrector", r.predictor_corrector}, {"regrid", r.regrid}, {"n_max", r.n_max},
                   {"dx_max", r.dx_max}, {"dx_min", r.dx_min}, {"widen_cap", r.widen_cap}};
    j["tolerances"] = {{"eps_shrink", r.eps_shrink}, {"eps_vanish", r.eps_vanish}, {"cfl", r.cfl},
                       {"move_frac", r.move_frac}, {"dt_max", r.dt_max}, {"dt_min", r.dt_min},
                       {"dt_fixed", r.dt_fixed}, {"tol_bound", r.tol_bound}, {"tol_monotone", r.tol_monotone}};
    j["horizons"] = {{"t_horizon", r.t_horizon}, {"x_max", r.x_max}, {"record_every", r.record_every},
                     {"checkpoint_every", r.checkpoint_every}, {"checkpoint_times", r.checkpoint_times},
                     {"stall_stop", r.stall_stop}, {"stall_window", r.stall_window}};
    j["classifier"] = {{"equiv_window", c.equiv_window}, {"tail_fraction", c.tail_fraction},
                       {"speed_match", c.speed_match}, {"plateau_tol", c.plateau_tol}, {"width_tol", c.width_tol},
                       {"profile_tol", c.profile_tol}, {"eps_stall", c.eps_stall},
                       {"center_slack_dx", c.center_slack_dx}};
    j["threshold"] = {{"tol", t.tol}, {"midpoint_tol", t.midpoint_tol}, {"sigma_start", t.sigma_start},
                      {"sigma_cap", t.sigma_cap}, {"sigma_floor", t.sigma_floor},
                      {"max_horizon_doublings", t.max_horizon_doublings},
                      {"midpoint_stall_window", t.midpoint_stall_window}};
    j["certificates"] = {{"critical_tol", s.certificates.critical_tol},
                         {"plateau_shifts", s.certificates.plateau_shifts},
                         {"plateau_table", s.certificates.plateau_table}};
    j["output"] = {{"dir", s.output.dir}, {"profiles", s.output.profiles}};
    j["sweep"] = {{"sigma", s.sweep.sigma}, {"alpha", s.sweep.alpha}};
    j["stationary"] = {{"n", s.stationary_n}};
    return j;
}

/// Initial data named by the settings: the cosine bump or samples from a CSV
/// holding either one column (phi) or two (x, phi) on a uniform grid.
inline InitialData make_initial(const RunSettings& s) {
    if (s.phi == "cosine") return InitialData::cosine(s.h0, s.sigma);
    const auto rows = read_csv_rows(settings_detail::resolve(s.base_dir, s.phi));
    if (rows.size() < 9) throw ValidationError("phi CSV needs at least 9 rows");
    std::vector<double> v;
    const std::size_t cols = rows.front().size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != cols || cols > 2) throw ValidationError("phi CSV rows must be 'phi' or 'x,phi'");
        if (cols == 2) {
            const double x = -s.h0 + 2.0 * s.h0 * static_cast<double>(i) / static_cast<double>(rows.size() - 1);
            if (std::abs(r[0] - x) > 1e-9 * std::max(1.0, s.h0))
                throw ValidationError("phi CSV x column must be a uniform grid of [-h0, h0]");
        }
        v.push_back(r.back());
    }
    InitialData d = InitialData::sampled(s.h0, s.sigma, std::move(v));
    d.label = s.phi;
    return d;
}

// ---------------------------------------------------------------- outputs

inline json to_json(const MonitorReport& m) {
    return {{"steps", m.steps},
            {"lower_bound_violations", m.lower_bound},
            {"upper_bound_violations", m.upper_bound},
            {"center_violations", m.center},
            {"positivity_violations", m.positivity},
            {"monotonicity_violations", m.monotonicity},
            {"monotonicity_checks", m.checked_monotone},
            {"worst_lower_margin", m.worst_lower_margin},
            {"worst_upper_margin", m.worst_upper_margin},
            {"worst_center_margin", m.worst_center_margin},
            {"last_C2", m.last_C2},
            {"notes", m.notes}};
}

inline json to_json(const Outcome& o) {
    json d = json::object();
    for (const auto& [k, v] : o.diagnostics) d[k] = v;
    json j = {{"verdict", to_string(o.verdict)}, {"reason", o.reason}, {"presumptive", o.presumptive},
              {"failed", o.failed}, {"diagnostics", d}};
    if (std::isfinite(o.t_star)) j["t_star"] = o.t_star;
    if (std::isfinite(o.width)) j["width"] = o.width;
    if (std::isfinite(o.profile_error)) j["profile_error"] = o.profile_error;
    return j;
}

inline json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double from_nullable(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

/// Everything needed to re-classify a run later, plus the resolved config.
inline json trajectory_json(const Trajectory& tr, const json& config) {
    const auto& f = tr.final_state;
    json samples = json::array();
    for (const auto& s : tr.samples) samples.push_back({s.t, s.g, s.h, s.gprime, s.hprime, s.max_u, s.dx});
    return {{"config", config},
            {"termination", to_string(tr.termination)},
            {"message", tr.message},
            {"t_star", nan_safe(tr.t_star)},
            {"t_shrink", nan_safe(tr.t_shrink)},
            {"t_vanish", nan_safe(tr.t_vanish)},
            {"lag", nan_safe(tr.lag)},
            {"stalled", tr.stalled},
            {"floor_declared", tr.floor_declared},
            {"h0", tr.h0},
            {"alpha", tr.alpha},
            {"sigma", tr.sigma},
            {"nonlinearity", tr.nonlinearity},
            {"steps", tr.steps},
            {"regrids", tr.regrids},
            {"running_max_u", tr.running_max_u},
            {"monitors", to_json(tr.monitors)},
            {"sample_columns", {"t", "g", "h", "gprime", "hprime", "max_u", "dx"}},
            {"samples", samples},
            {"final", {{"t", f.t}, {"g", f.g}, {"h", f.h}, {"gprime", f.gprime}, {"hprime", f.hprime}, {"u", f.u}}}};
}

inline Termination termination_from(const std::string& s) {
    for (auto t : {Termination::ShrinkVanish, Termination::HorizonReached, Termination::DomainOverflow,
                   Termination::NumericalFailure})
        if (s == to_string(t)) return t;
    throw ValidationError("unknown termination '" + s + "'");
}

inline Trajectory trajectory_from_json(const json& j) {
    try {
        Trajectory tr;
        tr.termination = termination_from(j.at("termination").get<std::string>());
        tr.message = j.value("message", "");
        tr.t_star = from_nullable(j.at("t_star"));
        tr.t_shrink = from_nullable(j.at("t_shrink"));
        tr.t_vanish = from_nullable(j.at("t_vanish"));
        tr.lag = from_nullable(j.at("lag"));
        tr.stalled = j.value("stalled", false);
        tr.floor_declared = j.value("floor_declared", false);
        tr.h0 = j.at("h0").get<double>();
        tr.alpha = j.at("alpha").get<double>();
        tr.sigma = j.at("sigma").get<double>();
        tr.nonlinearity = j.value("nonlinearity", "");
        tr.steps = j.value("steps", 0L);
        for (const auto& r : j.at("samples"))
            tr.samples.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>(),
                                  r[4].get<double>(), r[5].get<double>(), r[6].get<double>()});
        const json& f = j.at("final");
        tr.final_state.t = f.at("t").get<double>();
        tr.final_state.g = f.at("g").get<double>();
        tr.final_state.h = f.at("h").get<double>();
        tr.final_state.gprime = f.at("gprime").get<double>();
        tr.final_state.hprime = f.at("hprime").get<double>();
        tr.final_state.u = f.at("u").get<std::vector<double>>();
        return tr;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed trajectory file: ") + e.what());
    }
}

inline std::string fmt(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with a '# config: {...}' first line, a header row and numeric rows.
inline void write_csv(const std::filesystem::path& p, const json& config, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << "# config: " << config.dump() << "\n";
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << fmt(r[k]);
        out << "\n";
    }
}

inline void write_json(const std::filesystem::path& p, const json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << j.dump(2) << "\n";
}

inline void write_timeseries(const std::filesystem::path& p, const Trajectory& tr, const json& config) {
    std::vector<std::vector<double>> rows;
    for (const auto& s : tr.samples) rows.push_back({s.t, s.g, s.h, s.gprime, s.hprime, s.max_u});
    write_csv(p, config, {"t", "g", "h", "gprime", "hprime", "max_u"}, rows);
}

inline std::string time_tag(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%012.6f", t);
    return buf;
}

inline void write_checkpoint_profiles(const std::filesystem::path& dir, const Trajectory& tr, const json& config) {
    for (const auto& c : tr.checkpoints) {
        std::vector<std::vector<double>> rows;
        const int n = static_cast<int>(c.u.size()) - 1;
        for (int i = 0; i <= n; ++i) rows.push_back({c.g + (c.h - c.g) * i / n, c.u[i]});
        write_csv(dir / ("profile_t" + time_tag(c.t) + ".csv"), config, {"x", "u"}, rows);
    }
}

inline json to_json(const StationaryClass& sc) {
    json j = {{"alpha", sc.alpha},
              {"alpha0", sc.alpha0},
              {"case", to_string(sc.kind)},
              {"cond3_holds", sc.cond3_holds},
              {"sup_at_cap", sc.sup_at_cap}};
    j["B"] = nan_safe(sc.B);
    j["ell"] = sc.ell.is_finite() ? json(sc.ell.value()) : json("inf");
    if (sc.kind == StationaryCase::Unbounded) {
        j["ell_blowup"] = sc.ell_blowup.is_finite() ? json(sc.ell_blowup.value()) : json("inf");
        j["blowup_is_lower_bound"] = sc.blowup_is_lower_bound;
    }
    return j;
}

inline json to_json(const ThresholdResult& r) {
    json log = json::array();
    for (const auto& e : r.log)
        log.push_back({{"sigma", e.sigma}, {"verdict", to_string(e.verdict)}, {"spread", e.spread},
                       {"fallback", e.fallback}, {"t_end", e.t_end}, {"horizon", e.horizon}, {"phase", e.phase}});
    json j = {{"sigma_lo", r.sigma_lo},
              {"sigma_hi", std::isfinite(r.sigma_hi) ? json(r.sigma_hi) : json("inf")},
              {"width", std::isfinite(r.sigma_hi) ? json(r.width()) : json("inf")},
              {"coarse_lo", r.coarse_lo},
              {"coarse_hi", r.coarse_hi},
              {"sigma_star_infinite", r.infinite},
              {"no_vanishing_above_floor", r.no_vanishing},
              {"inconclusive", r.inconclusive},
              {"monotone_log", log_is_monotone(r.log)},
              {"simulations", r.log.size()},
              {"log", log}};
    if (std::isfinite(r.midpoint_sigma)) {
        j["midpoint_sigma"] = r.midpoint_sigma;
        j["midpoint_outcome"] = to_json(r.midpoint_outcome);
        j["midpoint_final_width"] = r.midpoint_run.final_state.width();
        j["midpoint_t_end"] = r.midpoint_run.final_state.t;
    }
    return j;
}

}  // namespace resfront::io
