#pragma once

// Suite results, corpus entries and the suite config document.
//
// Config document (JSON, version 1):
//
//   { "version": 1, "suite": "theorem1", "seed": 0,
//     "settings": { "t_exponents": [3, 13], "r_max": 0.5, "r_levels": 14, ... },
//     "cases": [ { "name": "gaussian_d1", "measure": {...} | "measure_file": "m.json",
//                  "x0": [0], "expected_class": "lebesgue", "alpha": [1, 2],
//                  "ell": 1 | [re, im], ... } ] }
//
// polar_lemma cases carry { "name", "measure", "center", "f0", "tol"? }
// instead; f0 is a radial expression in r. The kernel, eigenfunction and
// pde suites take no cases.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hpl/differentiation.hpp"
#include "hpl/measure_io.hpp"
#include "hpl/report.hpp"
#include "hpl/trend.hpp"

namespace hpl {

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Table {
    std::string name;
    std::string csv;
};

inline Json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

struct CaseResult {
    std::string name;
    std::string label;
    std::optional<Vec> x0;
    std::vector<std::pair<std::string, std::string>> verdicts;
    std::vector<std::pair<std::string, double>> numbers;
    std::vector<Check> checks;
    std::vector<Table> tables;
    /// Set when the case aborted with an exception; the case then fails.
    std::string error;

    void check(std::string n, bool ok, std::string detail = {}) { checks.push_back({std::move(n), ok, std::move(detail)}); }
    void number(std::string key, double v) { numbers.emplace_back(std::move(key), v); }
    void verdict(std::string key, std::string v) { verdicts.emplace_back(std::move(key), std::move(v)); }
    void table(std::string n, std::string csv) { tables.push_back({std::move(n), std::move(csv)}); }

    void trend(const std::string& key, const Trend& tr) {
        number(key + "_first", tr.first);
        number(key + "_last", tr.last);
        number(key + "_ratio", tr.ratio);
        number(key + "_slope", tr.slope);
        verdict(key, tr.verdict());
    }

    [[nodiscard]] bool pass() const {
        return error.empty() && !checks.empty() &&
               std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }

    [[nodiscard]] std::vector<std::string> artifacts(const std::string& suite) const {
        std::vector<std::string> out;
        for (const auto& t : tables) out.push_back(suite + "/" + name + "/" + t.name + ".csv");
        return out;
    }

    [[nodiscard]] Json to_json(const std::string& suite) const {
        Json j;
        j["name"] = name;
        j["label"] = label;
        if (x0) j["x0"] = detail::point_json(*x0);
        j["pass"] = pass();
        if (!error.empty()) j["error"] = error;
        Json v = Json::object();
        for (const auto& [k, s] : verdicts) v[k] = s;
        j["verdicts"] = v;
        Json n = Json::object();
        for (const auto& [k, x] : numbers) n[k] = json_number(x);
        j["numbers"] = n;
        Json c = Json::array();
        for (const auto& ch : checks) c.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
        j["checks"] = c;
        j["artifacts"] = artifacts(suite);
        return j;
    }
};

struct SuiteResult {
    std::string suite;
    /// Echo of the resolved config (settings, seed, corpus).
    Json config;
    std::vector<CaseResult> cases;

    [[nodiscard]] bool pass() const {
        return !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const CaseResult& c) { return c.pass(); });
    }

    [[nodiscard]] std::vector<std::string> artifacts() const {
        std::vector<std::string> out;
        for (const auto& c : cases)
            for (auto& a : c.artifacts(suite)) out.push_back(std::move(a));
        out.push_back(suite + "/report.json");
        return out;
    }

    [[nodiscard]] const CaseResult* find(const std::string& name) const {
        for (const auto& c : cases)
            if (c.name == name) return &c;
        return nullptr;
    }

    [[nodiscard]] Json to_json() const {
        Json j;
        j["suite"] = suite;
        j["pass"] = pass();
        j["config"] = config;
        Json cs = Json::array();
        for (const auto& c : cases) cs.push_back(c.to_json(suite));
        j["cases"] = cs;
        j["artifacts"] = artifacts();
        return j;
    }
};

/// Writes <out>/<suite>/<case>/<table>.csv and <out>/<suite>/report.json.
/// Files are written in case order from a single thread.
inline void write_suite(const SuiteResult& res, const std::filesystem::path& out) {
    namespace fs = std::filesystem;
    const fs::path root = out / res.suite;
    fs::create_directories(root);
    for (const auto& c : res.cases) {
        const fs::path dir = root / c.name;
        fs::create_directories(dir);
        for (const auto& t : c.tables) write_text_file((dir / (t.name + ".csv")).string(), t.csv);
    }
    write_text_file((root / "report.json").string(), res.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct SuiteSettings {
    /// Cone scans use t = 2^{-k} for k in [t_first, t_last].
    int t_first = 3;
    int t_last = 13;
    /// Residual tables use r = r_max 2^{-k}, k = 0..r_levels.
    double r_max = 0.5;
    int r_levels = 14;
    /// Absolute target for P_t nu(x) in cone scans.
    double apply_abs_tol = 1e-10;
    /// Ball masses in residual tables, relative to each table's normalization.
    double table_tol = 1e-6;
    TrendThresholds trend{};
    std::vector<double> aperture_fracs{0.0, 0.5, 1.0};
    /// Kernel quadrature relative tolerance (overridable by HPL_QUAD_TOL).
    double quad_rel_tol = 1e-9;

    void validate() const {
        if (t_first < 0 || t_last < t_first) throw ConfigError("settings.t_exponents: need 0 <= first <= last");
        if (!(r_max > 0.0) || r_levels < 1) throw ConfigError("settings: need r_max > 0 and r_levels >= 1");
        if (!(apply_abs_tol > 0.0) || !(table_tol > 0.0) || !(quad_rel_tol > 0.0))
            throw ConfigError("settings: tolerances must be positive");
        if (!(trend.ratio > 0.0 && trend.ratio < 1.0) || !(trend.final_value > 0.0))
            throw ConfigError("settings: trend thresholds must satisfy 0 < ratio < 1 and final > 0");
        if (aperture_fracs.empty()) throw ConfigError("settings.aperture_fracs: empty");
        for (double f : aperture_fracs)
            if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("settings.aperture_fracs: entries must lie in [0,1]");
    }
};

struct SmallBallSpec {
    SmallBallExponent exponent = SmallBallExponent::d_minus_3;
    /// When set the suite asserts that the table's trend converges;
    /// otherwise the table is only emitted and its verdict recorded.
    bool require = false;
};

[[nodiscard]] inline const char* exponent_name(SmallBallExponent e) {
    return e == SmallBallExponent::d_minus_3 ? "d-3" : "d-4";
}

struct CorpusCase {
    std::string name;
    ComplexMeasure measure;
    /// Config-relative path the measure was loaded from, if any.
    std::string measure_file;
    Vec x0;
    Verdict expected = Verdict::lebesgue;
    std::vector<double> alphas{1.0};
    std::optional<Complex> ell;
    /// Optional oracle for the last Lebesgue-residual entry.
    std::optional<double> lebesgue_final_target;
    double lebesgue_final_rel_tol = 0.2;
    /// Optional expected log-log slope of divergent residual trends.
    std::optional<double> divergence_slope;
    double slope_tol = 0.1;
    std::vector<SmallBallSpec> small_ball;
};

struct PolarCase {
    std::string name;
    ComplexMeasure measure;
    std::string measure_file;
    Vec center;
    /// Radial test function f0(r) as an expression in r.
    std::string f0 = "1";
    /// Defaults to 1e-12 for purely atomic measures and 1e-6 otherwise.
    std::optional<double> tol;
};

struct SuiteConfig {
    std::string suite;
    std::uint64_t seed = 0;
    SuiteSettings settings{};
    std::vector<CorpusCase> cases;
    std::vector<PolarCase> polar_cases;
};

[[nodiscard]] inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"eigenfunction", "pde",          "polar_lemma",   "kernel_bounds",
                                                "theorem1",      "theorem2_fatou", "theorem2_d3cond"};
    return names;
}

[[nodiscard]] inline bool is_corpus_suite(const std::string& s) {
    return s == "theorem1" || s == "theorem2_fatou" || s == "theorem2_d3cond";
}

namespace detail {

inline Json complex_json(Complex z) {
    if (z.imag() == 0.0) return z.real();
    return Json::array({z.real(), z.imag()});
}

inline Complex complex_from_json(const Json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(where + ": expected a number or [re, im]");
}

inline std::optional<std::uint64_t> seed_from_json(const Json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(where + ": expected a nonnegative integer");
    return j.get<std::uint64_t>();
}

inline ComplexMeasure case_measure(const Json& c, const std::filesystem::path& base, std::string& file,
                                   const std::string& where) {
    if (c.contains("measure")) return measure_from_json(c.at("measure"));
    if (c.contains("measure_file")) {
        file = c.at("measure_file").get<std::string>();
        const std::filesystem::path p = std::filesystem::path(file).is_absolute() ? std::filesystem::path(file) : base / file;
        return load_measure(p.string());
    }
    throw ConfigError(where + ": needs 'measure' or 'measure_file'");
}

inline void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [k, v] : obj.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
            throw ConfigError(where + ": unknown key '" + k + "'");
}

inline Json settings_to_json(const SuiteSettings& s) {
    Json j;
    j["t_exponents"] = {s.t_first, s.t_last};
    j["r_max"] = s.r_max;
    j["r_levels"] = s.r_levels;
    j["apply_abs_tol"] = s.apply_abs_tol;
    j["table_tol"] = s.table_tol;
    j["trend_ratio"] = s.trend.ratio;
    j["trend_final"] = s.trend.final_value;
    j["trend_zero"] = s.trend.zero;
    j["aperture_fracs"] = s.aperture_fracs;
    j["quad_rel_tol"] = s.quad_rel_tol;
    return j;
}

inline SuiteSettings settings_from_json(const Json& j) {
    SuiteSettings s;
    if (!j.is_object()) throw ConfigError("settings: expected an object");
    for (const auto& [k, v] : j.items()) {
        const std::string w = "settings." + k;
        if (k == "t_exponents") {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
                throw ConfigError(w + ": expected [first, last]");
            s.t_first = v[0].get<int>();
            s.t_last = v[1].get<int>();
        } else if (k == "r_max") s.r_max = number(v, w);
        else if (k == "r_levels") {
            if (!v.is_number_integer()) throw ConfigError(w + ": expected an integer");
            s.r_levels = v.get<int>();
        } else if (k == "apply_abs_tol") s.apply_abs_tol = number(v, w);
        else if (k == "table_tol") s.table_tol = number(v, w);
        else if (k == "trend_ratio") s.trend.ratio = number(v, w);
        else if (k == "trend_final") s.trend.final_value = number(v, w);
        else if (k == "trend_zero") s.trend.zero = number(v, w);
        else if (k == "quad_rel_tol") s.quad_rel_tol = number(v, w);
        else if (k == "aperture_fracs") {
            if (!v.is_array()) throw ConfigError(w + ": expected an array");
            s.aperture_fracs.clear();
            for (const auto& f : v) s.aperture_fracs.push_back(number(f, w));
        } else {
            throw ConfigError("settings: unknown key '" + k + "'");
        }
    }
    s.validate();
    return s;
}

}  // namespace detail

[[nodiscard]] inline Json suite_config_to_json(const SuiteConfig& cfg) {
    Json j;
    j["version"] = 1;
    j["suite"] = cfg.suite;
    j["seed"] = cfg.seed;
    j["settings"] = detail::settings_to_json(cfg.settings);
    Json cases = Json::array();
    for (const auto& c : cfg.cases) {
        Json e;
        e["name"] = c.name;
        if (!c.measure_file.empty()) e["measure_file"] = c.measure_file;
        else e["measure"] = measure_to_json(c.measure);
        e["x0"] = detail::point_json(c.x0);
        e["expected_class"] = verdict_name(c.expected);
        e["alpha"] = c.alphas;
        if (c.ell) e["ell"] = detail::complex_json(*c.ell);
        if (c.lebesgue_final_target) {
            e["lebesgue_final_target"] = *c.lebesgue_final_target;
            e["lebesgue_final_rel_tol"] = c.lebesgue_final_rel_tol;
        }
        if (c.divergence_slope) {
            e["divergence_slope"] = *c.divergence_slope;
            e["slope_tol"] = c.slope_tol;
        }
        if (!c.small_ball.empty()) {
            Json sb = Json::array();
            for (const auto& s : c.small_ball) sb.push_back({{"exponent", exponent_name(s.exponent)}, {"require", s.require}});
            e["small_ball"] = sb;
        }
        cases.push_back(e);
    }
    for (const auto& c : cfg.polar_cases) {
        Json e;
        e["name"] = c.name;
        if (!c.measure_file.empty()) e["measure_file"] = c.measure_file;
        else e["measure"] = measure_to_json(c.measure);
        e["center"] = detail::point_json(c.center);
        e["f0"] = c.f0;
        if (c.tol) e["tol"] = *c.tol;
        cases.push_back(e);
    }
    j["cases"] = cases;
    return j;
}

/// Parses a suite config; measure_file paths resolve against `base`.
[[nodiscard]] inline SuiteConfig suite_config_from_json(const Json& j, const std::filesystem::path& base = ".") {
    if (!j.is_object()) throw ConfigError("suite config: expected an object");
    detail::check_keys(j, {"version", "suite", "seed", "settings", "cases"}, "suite config");
    const double version = detail::number(detail::require(j, "version", "suite config"), "suite config.version");
    if (version != 1) throw ConfigError("suite config: unsupported version " + format_double(version));
    SuiteConfig cfg;
    const Json& s = detail::require(j, "suite", "suite config");
    if (!s.is_string()) throw ConfigError("suite config.suite: expected a string");
    cfg.suite = s.get<std::string>();
    if (std::find(suite_names().begin(), suite_names().end(), cfg.suite) == suite_names().end())
        throw ConfigError("suite config: unknown suite '" + cfg.suite + "'");
    if (j.contains("seed")) cfg.seed = *detail::seed_from_json(j.at("seed"), "suite config.seed");
    if (j.contains("settings")) cfg.settings = detail::settings_from_json(j.at("settings"));
    if (!j.contains("cases")) return cfg;
    const Json& cases = j.at("cases");
    if (!cases.is_array()) throw ConfigError("suite config.cases: expected an array");
    std::vector<std::string> seen;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const Json& c = cases[i];
        const std::string w = "cases[" + std::to_string(i) + "]";
        if (!c.is_object()) throw ConfigError(w + ": expected an object");
        if (cfg.suite == "polar_lemma")
            detail::check_keys(c, {"name", "measure", "measure_file", "center", "f0", "tol"}, w);
        else
            detail::check_keys(c,
                               {"name", "measure", "measure_file", "x0", "expected_class", "alpha", "ell",
                                "lebesgue_final_target", "lebesgue_final_rel_tol", "divergence_slope", "slope_tol",
                                "small_ball"},
                               w);
        const Json& nm = detail::require(c, "name", w);
        if (!nm.is_string() || nm.get<std::string>().empty()) throw ConfigError(w + ".name: expected a non-empty string");
        const std::string name = nm.get<std::string>();
        if (name.find_first_of("/\\") != std::string::npos || name == "." || name == "..")
            throw ConfigError(w + ".name: must be a plain directory name");
        if (std::find(seen.begin(), seen.end(), name) != seen.end()) throw ConfigError(w + ": duplicate name '" + name + "'");
        seen.push_back(name);
        if (cfg.suite == "polar_lemma") {
            PolarCase p;
            p.name = name;
            p.measure = detail::case_measure(c, base, p.measure_file, w);
            p.center = c.contains("center") ? detail::point(c.at("center"), p.measure.d, w + ".center")
                                            : Vec::zero(p.measure.d);
            if (c.contains("f0")) p.f0 = c.at("f0").get<std::string>();
            try {
                if (!parse_density(p.f0).is_radial()) throw ConfigError(w + ".f0: must depend on r only");
            } catch (const ParseError& e) {
                throw ConfigError(w + ".f0: " + e.what());
            }
            if (c.contains("tol")) p.tol = detail::number(c.at("tol"), w + ".tol");
            cfg.polar_cases.push_back(std::move(p));
            continue;
        }
        if (!is_corpus_suite(cfg.suite)) throw ConfigError("suite '" + cfg.suite + "' takes no cases");
        CorpusCase cc;
        cc.name = name;
        cc.measure = detail::case_measure(c, base, cc.measure_file, w);
        cc.x0 = detail::point(detail::require(c, "x0", w), cc.measure.d, w + ".x0");
        const Json& ec = detail::require(c, "expected_class", w);
        if (!ec.is_string()) throw ConfigError(w + ".expected_class: expected a string");
        cc.expected = parse_verdict(ec.get<std::string>());
        if (c.contains("alpha")) {
            const Json& a = c.at("alpha");
            cc.alphas.clear();
            if (a.is_number()) cc.alphas.push_back(a.get<double>());
            else if (a.is_array())
                for (const auto& v : a) cc.alphas.push_back(detail::number(v, w + ".alpha"));
            else throw ConfigError(w + ".alpha: expected a number or an array");
            if (cc.alphas.empty()) throw ConfigError(w + ".alpha: empty");
            for (double v : cc.alphas)
                if (!(v > 0.0)) throw ConfigError(w + ".alpha: apertures must be positive");
        }
        if (c.contains("ell")) cc.ell = detail::complex_from_json(c.at("ell"), w + ".ell");
        if (c.contains("lebesgue_final_target"))
            cc.lebesgue_final_target = detail::number(c.at("lebesgue_final_target"), w + ".lebesgue_final_target");
        cc.lebesgue_final_rel_tol = detail::number_or(c, "lebesgue_final_rel_tol", 0.2, w);
        if (c.contains("divergence_slope"))
            cc.divergence_slope = detail::number(c.at("divergence_slope"), w + ".divergence_slope");
        cc.slope_tol = detail::number_or(c, "slope_tol", 0.1, w);
        if (c.contains("small_ball")) {
            const Json& sb = c.at("small_ball");
            if (!sb.is_array()) throw ConfigError(w + ".small_ball: expected an array");
            for (const auto& e : sb) {
                if (!e.is_object()) throw ConfigError(w + ".small_ball: expected objects");
                detail::check_keys(e, {"exponent", "require"}, w + ".small_ball");
                SmallBallSpec spec;
                const Json& ex = detail::require(e, "exponent", w + ".small_ball");
                if (ex == "d-3") spec.exponent = SmallBallExponent::d_minus_3;
                else if (ex == "d-4") spec.exponent = SmallBallExponent::d_minus_4;
                else throw ConfigError(w + ".small_ball.exponent: expected \"d-3\" or \"d-4\"");
                const int need = spec.exponent == SmallBallExponent::d_minus_3 ? 4 : 5;
                if (cc.measure.d < need)
                    throw ConfigError(w + ".small_ball: exponent " + exponent_name(spec.exponent) + " needs d >= " +
                                      std::to_string(need));
                if (e.contains("require")) spec.require = e.at("require").get<bool>();
                cc.small_ball.push_back(spec);
            }
        }
        cfg.cases.push_back(std::move(cc));
    }
    return cfg;
}

[[nodiscard]] inline SuiteConfig load_suite_config(const std::string& path) {
    return suite_config_from_json(parse_json_text(read_text_file(path), path),
                                  std::filesystem::path(path).parent_path());
}

}  // namespace hpl
