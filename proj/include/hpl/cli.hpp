#pragma once

// Command-line front door. run() parses argv, computes every result, and only
// then writes files and stdout, so a usage error leaves no partial output.
//
// Exit codes: 0 success, 1 suite or check failure, 2 usage error (grammar on
// stderr), 3 numeric failure (quadrature or cubature did not converge).
//
// Points and complex numbers are comma-separated ("1,0", "0.5,-2"); write
// negative leading values as --x=-1,0 so they are not read as flags.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hpl/experiments.hpp"
#include "hpl/measure_io.hpp"

namespace hpl::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kNumeric = 3 };

/// A bad invocation detected after argv parsing (bad point, bad config).
class UsageError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = s.find(',', pos);
        const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            out.push_back(parse_double(item));
        } catch (const ConfigError&) {
            throw UsageError(flag + ": '" + s + "' is not a comma-separated list of numbers");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline double parse_scalar(const std::string& s, const std::string& flag) {
    const auto v = parse_list(s, flag);
    if (v.size() != 1) throw UsageError(flag + ": expected one number, got '" + s + "'");
    return v.front();
}

inline Vec parse_point(const std::string& s, int d, const std::string& flag) {
    const auto v = parse_list(s, flag);
    if (static_cast<int>(v.size()) != d)
        throw UsageError(flag + ": expected " + std::to_string(d) + " coordinates, got '" + s + "'");
    return Vec(v);
}

inline std::vector<Vec> parse_points(const std::vector<std::string>& items, int d, const std::string& flag) {
    std::vector<Vec> out;
    for (const auto& s : items) out.push_back(parse_point(s, d, flag));
    return out;
}

inline std::vector<double> parse_scalars(const std::vector<std::string>& items, const std::string& flag) {
    std::vector<double> out;
    for (const auto& s : items) out.push_back(parse_scalar(s, flag));
    return out;
}

inline Complex parse_complex(const std::string& s, const std::string& flag) {
    const auto v = parse_list(s, flag);
    if (v.size() == 1) return {v[0], 0.0};
    if (v.size() == 2) return {v[0], v[1]};
    throw UsageError(flag + ": expected 're' or 're,im', got '" + s + "'");
}

/// HPL_QUAD_TOL, when set, overrides the kernel quadrature relative tolerance.
inline std::optional<double> env_quad_tol() {
    const char* v = std::getenv("HPL_QUAD_TOL");
    if (v == nullptr || *v == '\0') return std::nullopt;
    double tol = 0.0;
    try {
        tol = parse_double(v);
    } catch (const ConfigError&) {
        throw UsageError(std::string("HPL_QUAD_TOL: '") + v + "' is not a number");
    }
    if (!(tol > 0.0 && tol < 1.0)) throw UsageError(std::string("HPL_QUAD_TOL: must lie in (0,1), got '") + v + "'");
    return tol;
}

inline KernelConfig kernel_config(int d) {
    KernelConfig cfg = KernelConfig::calibrated(d);
    if (auto tol = env_quad_tol()) cfg.quad_rel_tol = *tol;
    return cfg;
}

/// Measure source shared by the measure-taking subcommands: a measure
/// document, or a single density term given inline.
struct MeasureArgs {
    std::string file;
    std::string density;
    std::string center;
    double support = 12.0;
    int d = 0;

    void attach(CLI::App* app) {
        auto* f = app->add_option("--measure", file, "Measure document (JSON)");
        auto* e = app->add_option("--density", density, "Inline density expression, e.g. 'exp(-r^2/2)'");
        f->excludes(e);
        app->add_option("--support", support, "Support radius of --density")->capture_default_str();
        app->add_option("--center", center, "Center of --density (default origin)");
        app->add_option("--d", d, "Dimension (required with --density)")->check(CLI::Range(1, kMaxDim));
    }

    [[nodiscard]] ComplexMeasure load() const {
        if (!file.empty()) {
            ComplexMeasure m = load_measure(file);
            if (d != 0 && d != m.d) throw UsageError("--d " + std::to_string(d) + " disagrees with the measure (d = " +
                                                     std::to_string(m.d) + ")");
            return m;
        }
        if (density.empty()) throw UsageError("one of --measure or --density is required");
        if (d == 0) throw UsageError("--density needs --d");
        if (!(support > 0.0)) throw UsageError("--support must be positive");
        const Vec c = center.empty() ? Vec::zero(d) : parse_point(center, d, "--center");
        ComplexMeasure m;
        m.d = d;
        m.label = density;
        m.ac.push_back(make_ac_term(density, c, support));
        m.validate();
        return m;
    }
};

/// Flags given on the command line, in declaration order. --jobs and
/// --out are left out so reports do not depend on them.
inline std::vector<std::pair<std::string, std::string>> echo_flags(const CLI::App& sub) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const CLI::Option* o : sub.get_options()) {
        if (o->count() == 0) continue;
        std::string name = o->get_name();
        while (!name.empty() && name.front() == '-') name.erase(name.begin());
        if (name == "jobs" || name == "out" || name == "help") continue;
        std::string v;
        for (const auto& r : o->results()) v += (v.empty() ? "" : " ") + r;
        out.emplace_back("flag_" + name, v);
    }
    if (const char* e = std::getenv("HPL_QUAD_TOL"); e != nullptr && *e != '\0') out.emplace_back("env_HPL_QUAD_TOL", e);
    return out;
}

/// Everything a subcommand produces, held until the run cannot fail on
/// usage any more.
struct Outcome {
    std::string text;
    std::vector<std::pair<std::string, std::string>> files;  ///< name relative to --out, content
    std::optional<SuiteResult> suite;
    int code = kOk;
};

inline std::string render(const std::string& command, const ScanReport& rep) {
    std::string s = "# hpl " + command + "\n";
    s += "# title," + rep.title + "\n";
    for (const auto& [k, v] : rep.header) s += "# " + k + "," + v + "\n";
    return s + rep.to_csv();
}

inline void add_point_columns(std::vector<std::string>& cols, const char* prefix, int d) {
    for (int i = 0; i < d; ++i) cols.push_back(prefix + std::to_string(i + 1));
}

inline void append(std::vector<double>& row, const Vec& v) {
    for (int i = 0; i < v.dim(); ++i) row.push_back(v[i]);
}

inline void hold(Outcome& o, const std::string& command, ScanReport rep, const CLI::App& sub,
                 const std::string& out_dir) {
    auto flags = echo_flags(sub);
    rep.header.insert(rep.header.begin(), flags.begin(), flags.end());
    o.text = render(command, rep);
    if (!out_dir.empty()) o.files.emplace_back(command + ".csv", o.text);
}

inline bool any_flag(const ScanReport& rep, bool count_underflow) {
    for (const auto& f : rep.flags)
        if (!f.empty() && (count_underflow || f != "underflow")) return true;
    return false;
}

}  // namespace detail

/// Parses and runs one invocation. Results go to `out`, diagnostics and the
/// grammar (on usage errors) to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using namespace detail;
    CLI::App app{"Poisson-Hermite semigroup evaluator and boundary-convergence suites", "hpl"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Print the grammar of every subcommand");

    std::string out_dir;
    unsigned jobs = 0;
    std::uint64_t seed = 0;
    auto add_out = [&](CLI::App* s) { s->add_option("--out", out_dir, "Directory for CSV/JSON outputs"); };

    // kernel
    int k_d = 1;
    std::vector<std::string> k_t, k_x, k_y;
    std::string k_range = "full";
    auto* kernel = app.add_subcommand("kernel", "Evaluate the calibrated kernel P_t(x,y) with its error estimate");
    kernel->add_option("--d", k_d, "Dimension")->required()->check(CLI::Range(1, kMaxDim));
    kernel->add_option("--t", k_t, "Time (repeatable)")->required();
    kernel->add_option("--x", k_x, "Point x (repeatable)")->required();
    kernel->add_option("--y", k_y, "Point y (repeatable)")->required();
    kernel->add_option("--range", k_range, "Part of the kernel: full, local or global")
        ->check(CLI::IsMember({"full", "local", "global"}))
        ->capture_default_str();
    add_out(kernel);

    // phi
    int p_d = 1;
    std::vector<std::string> p_y;
    auto* phi_cmd = app.add_subcommand("phi", "Evaluate the weight Phi(y)");
    phi_cmd->add_option("--d", p_d, "Dimension")->required()->check(CLI::Range(1, kMaxDim));
    phi_cmd->add_option("--y", p_y, "Point y (repeatable)")->required();
    add_out(phi_cmd);

    // apply
    MeasureArgs a_m;
    std::vector<std::string> a_t, a_x;
    auto* apply_cmd = app.add_subcommand("apply", "Evaluate P_t nu(x) for a measure");
    a_m.attach(apply_cmd);
    apply_cmd->add_option("--t", a_t, "Time (repeatable)")->required();
    apply_cmd->add_option("--x", a_x, "Point x (repeatable)")->required();
    add_out(apply_cmd);

    // scan-cone
    MeasureArgs s_m;
    std::string s_x0, s_ell, s_quantity = "residual";
    double s_alpha = 1.0;
    std::vector<std::string> s_t, s_frac, s_dir;
    auto* scan = app.add_subcommand("scan-cone", "Sample P_t nu inside a cone at x0 as t decreases");
    s_m.attach(scan);
    scan->add_option("--x0", s_x0, "Cone vertex")->required();
    scan->add_option("--alpha", s_alpha, "Cone aperture")->capture_default_str();
    scan->add_option("--t", s_t, "Time grid, strictly decreasing (default 2^-3..2^-13)");
    scan->add_option("--frac", s_frac, "Aperture fractions in [0,1] (default 0, 0.5, 1)");
    scan->add_option("--direction", s_dir, "Sampling direction (default +-e1 and 2 seeded random)");
    scan->add_option("--ell", s_ell, "Limit value 're' or 're,im' (default: symmetric derivative estimate)");
    scan->add_option("--quantity", s_quantity, "residual: |P_t nu - ell|, tv: P_t|nu - ell dy|")
        ->check(CLI::IsMember({"residual", "tv"}))
        ->capture_default_str();
    scan->add_option("--seed", seed, "Seed for random directions")->capture_default_str();
    scan->add_option("--jobs", jobs, "Worker threads (0 = all cores); results do not depend on it");
    add_out(scan);

    // diff
    MeasureArgs d_m;
    std::string d_x0, d_ell;
    std::vector<std::string> d_r;
    auto* diff = app.add_subcommand("diff", "Classify x0 as a Lebesgue point, sigma-point or neither");
    d_m.attach(diff);
    diff->add_option("--x0", d_x0, "Point to classify")->required();
    diff->add_option("--r", d_r, "Radius grid, strictly decreasing (default 0.5 2^-k, k = 0..14)");
    diff->add_option("--ell", d_ell, "Candidate value 're' or 're,im' (default: symmetric derivative estimate)");
    diff->add_option("--seed", seed, "Seed for random probe directions")->capture_default_str();
    add_out(diff);

    // bounds
    int b_d = 1;
    std::string b_x = "";
    std::vector<std::string> b_t, b_y;
    double b_gamma = 2.0;
    auto* bounds = app.add_subcommand("bounds", "Ratios of the kernel to its comparison functions");
    bounds->add_option("--d", b_d, "Dimension")->required()->check(CLI::Range(1, kMaxDim));
    bounds->add_option("--t", b_t, "Time (repeatable)")->required();
    bounds->add_option("--x", b_x, "Point x (default origin)");
    bounds->add_option("--y", b_y, "Point y (repeatable; default 65 points on [0,8] e1)");
    bounds->add_option("--gamma", b_gamma, "Reach of the local part")->capture_default_str();
    add_out(bounds);

    // polar-check
    MeasureArgs q_m;
    std::string q_center, q_f0 = "1";
    std::optional<double> q_tol;
    auto* polar = app.add_subcommand("polar-check", "Compare the polar-coordinates formula with direct integration");
    q_m.attach(polar);
    polar->add_option("--at", q_center, "Polar center (default origin)");
    polar->add_option("--f0", q_f0, "Radial test function of r")->capture_default_str();
    polar->add_option("--tol", q_tol, "Scaled tolerance (default 1e-12 atomic, 1e-6 otherwise)");
    add_out(polar);

    // suite
    std::string u_name, u_config;
    bool u_print = false;
    std::vector<int> u_texp;
    std::optional<int> u_rlevels;
    auto* suite = app.add_subcommand("suite", "Run a named acceptance suite");
    suite->add_option("name", u_name, "Suite name")->required()->check(CLI::IsMember(suite_names()));
    suite->add_option("--config", u_config, "Suite config document (JSON); default: built-in corpus");
    suite->add_option("--seed", seed, "Overrides the config seed");
    suite->add_option("--jobs", jobs, "Concurrent cases (0 = all cores); results do not depend on it");
    suite->add_option("--t-exponents", u_texp, "Cone time grid 2^-first..2^-last")->expected(2);
    suite->add_option("--r-levels", u_rlevels, "Residual radii r_max 2^-k, k = 0..levels");
    suite->add_flag("--print-config", u_print, "Print the resolved config and exit");
    add_out(suite);

    // calibrate
    int c_d = 1;
    auto* calibrate = app.add_subcommand("calibrate", "Compute c_d and verify it at a held-out point");
    calibrate->add_option("--d", c_d, "Dimension")->required()->check(CLI::Range(1, kMaxDim));
    add_out(calibrate);

    auto usage = [&](const std::string& message, const CLI::App* sub) {
        err << "hpl: " << message << "\n\n" << (sub ? sub->help() : app.help()) << std::flush;
        return kUsage;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        const CLI::App* sub = nullptr;
        for (const auto* s : app.get_subcommands()) sub = s;
        return usage(e.what(), sub);
    }
    // Subcommand help is raised from inside parse; anything else reaches here.
    const CLI::App* sub = app.get_subcommands().front();

    Outcome o;
    try {
        if (sub == kernel) {
            const KernelConfig cfg = kernel_config(k_d);
            const auto ts = parse_scalars(k_t, "--t");
            const auto xs = parse_points(k_x, k_d, "--x");
            const auto ys = parse_points(k_y, k_d, "--y");
            const KernelRange range =
                k_range == "local" ? KernelRange::local : (k_range == "global" ? KernelRange::global : KernelRange::full);
            ScanReport rep;
            rep.title = "kernel";
            rep.header = {{"d", std::to_string(k_d)}, {"c_d", format_double(cfg.c_d)},
                          {"quad_rel_tol", format_double(cfg.quad_rel_tol)}, {"range", k_range}};
            rep.columns = {"t"};
            add_point_columns(rep.columns, "x", k_d);
            add_point_columns(rep.columns, "y", k_d);
            rep.columns.insert(rep.columns.end(), {"value", "error", "evaluations"});
            for (double t : ts) {
                if (!(t > 0.0)) throw UsageError("--t must be positive");
                for (const auto& x : xs)
                    for (const auto& y : ys) {
                        const KernelValue kv = poisson_hermite_eval(cfg, t, x, y, range);
                        std::vector<double> row{t};
                        append(row, x);
                        append(row, y);
                        row.insert(row.end(), {kv.value, kv.error, static_cast<double>(kv.evaluations)});
                        rep.add_row(std::move(row), !kv.converged ? "quadrature" : (kv.underflow ? "underflow" : ""));
                    }
            }
            if (any_flag(rep, false)) o.code = kNumeric;
            hold(o, "kernel", std::move(rep), *sub, out_dir);
        } else if (sub == phi_cmd) {
            const auto ys = parse_points(p_y, p_d, "--y");
            ScanReport rep;
            rep.title = "phi";
            rep.header = {{"d", std::to_string(p_d)}};
            add_point_columns(rep.columns, "y", p_d);
            rep.columns.push_back("phi");
            for (const auto& y : ys) {
                std::vector<double> row;
                append(row, y);
                row.push_back(phi(y));
                rep.add_row(std::move(row));
            }
            hold(o, "phi", std::move(rep), *sub, out_dir);
        } else if (sub == apply_cmd) {
            const ComplexMeasure m = a_m.load();
            const KernelConfig cfg = kernel_config(m.d);
            const auto ts = parse_scalars(a_t, "--t");
            const auto xs = parse_points(a_x, m.d, "--x");
            ScanReport rep;
            rep.title = "apply";
            rep.header = {{"d", std::to_string(m.d)}, {"measure", m.label}, {"c_d", format_double(cfg.c_d)}};
            rep.columns = {"t"};
            add_point_columns(rep.columns, "x", m.d);
            rep.columns.insert(rep.columns.end(), {"re", "im", "error"});
            for (double t : ts) {
                if (!(t > 0.0)) throw UsageError("--t must be positive");
                for (const auto& x : xs) {
                    const ApplyResult r = apply_detailed(cfg, m, t, x);
                    std::vector<double> row{t};
                    append(row, x);
                    row.insert(row.end(), {r.value.real(), r.value.imag(), r.error});
                    rep.add_row(std::move(row), r.flag());
                }
            }
            if (any_flag(rep, false)) o.code = kNumeric;
            hold(o, "apply", std::move(rep), *sub, out_dir);
        } else if (sub == scan) {
            const ComplexMeasure m = s_m.load();
            const KernelConfig cfg = kernel_config(m.d);
            ConeScanSpec spec;
            spec.cone = {parse_point(s_x0, m.d, "--x0"), s_alpha};
            if (!s_t.empty()) spec.t_grid = parse_scalars(s_t, "--t");
            if (!s_frac.empty()) spec.aperture_fracs = parse_scalars(s_frac, "--frac");
            spec.directions = parse_points(s_dir, m.d, "--direction");
            if (!s_ell.empty()) spec.expected_ell = parse_complex(s_ell, "--ell");
            spec.seed = seed;
            try {
                spec.validate(m.d);
            } catch (const DomainError& e) {
                throw UsageError(e.what());
            }
            ConeScanOptions opt;
            opt.quantity = s_quantity == "tv" ? ConeQuantity::tv : ConeQuantity::residual;
            opt.jobs = jobs;
            ScanReport rep = cone_scan(cfg, m, spec, opt);
            rep.header.emplace_back("measure", m.label);
            if (any_flag(rep, false)) o.code = kNumeric;
            hold(o, "scan-cone", std::move(rep), *sub, out_dir);
        } else if (sub == diff) {
            const ComplexMeasure m = d_m.load();
            ClassifyOptions co;
            const Vec x0 = parse_point(d_x0, m.d, "--x0");
            if (!d_r.empty()) co.r_grid = parse_scalars(d_r, "--r");
            try {
                hpl::detail::check_grid(co.r_grid);
            } catch (const DomainError& e) {
                throw UsageError(e.what());
            }
            if (!d_ell.empty()) co.ell = parse_complex(d_ell, "--ell");
            co.sigma.seed = seed;
            const PointDiagnosis dg = classify(m, x0, co);
            ScanReport rep;
            rep.title = "diff";
            rep.header = {{"d", std::to_string(m.d)}, {"measure", m.label}};
            std::string x0s;
            for (int i = 0; i < m.d; ++i) x0s += (i ? " " : "") + format_double(x0[i]);
            rep.header.emplace_back("x0", x0s);
            rep.columns = {"r", "ball_average_re", "ball_average_im", "lebesgue_residual", "sigma_residual"};
            if (dg.d3_residuals) rep.columns.push_back("d3_residual");
            for (std::size_t i = 0; i < dg.derivative.table.size(); ++i) {
                std::vector<double> row{dg.derivative.table.r[i], dg.derivative.table.value[i].real(),
                                        dg.derivative.table.value[i].imag(),
                                        std::abs(dg.lebesgue_residuals.value[i]), dg.sigma_residuals.level_sup[i]};
                if (dg.d3_residuals) row.push_back(std::abs(dg.d3_residuals->value[i]));
                rep.add_row(std::move(row));
            }
            rep.note("verdict", verdict_name(dg.verdict));
            rep.note("ell_re", dg.ell.real());
            rep.note("ell_im", dg.ell.imag());
            auto trend = [&](const std::string& key, const Trend& t) {
                rep.note(key + "_trend", t.verdict());
                rep.note(key + "_ratio", t.ratio);
                rep.note(key + "_final", t.last);
            };
            trend("lebesgue", dg.lebesgue_trend);
            trend("sigma", dg.sigma_trend);
            trend("derivative", dg.derivative_trend);
            if (dg.d3_trend) trend("d3", *dg.d3_trend);
            hold(o, "diff", std::move(rep), *sub, out_dir);
            if (!out_dir.empty()) o.files.emplace_back("diff_sigma_probes.csv", dg.sigma_residuals.to_csv());
        } else if (sub == bounds) {
            const KernelConfig cfg = kernel_config(b_d);
            const Vec x = b_x.empty() ? Vec::zero(b_d) : parse_point(b_x, b_d, "--x");
            std::vector<Vec> ys = parse_points(b_y, b_d, "--y");
            if (ys.empty())
                for (int i = 0; i <= 64; ++i) ys.push_back(Vec::unit(b_d, 0) * (8.0 * i / 64.0));
            if (!(b_gamma > 0.0)) throw UsageError("--gamma must be positive");
            std::string text;
            bool first = true;
            for (double t : parse_scalars(b_t, "--t")) {
                if (!(t > 0.0)) throw UsageError("--t must be positive");
                ScanReport rep = bound_ratio_report(cfg, t, x, ys, b_gamma);
                if (any_flag(rep, false)) o.code = kNumeric;
                Outcome part;
                hold(part, "bounds", std::move(rep), *sub, "");
                text += (first ? "" : "\n") + part.text;
                first = false;
            }
            o.text = text;
            if (!out_dir.empty()) o.files.emplace_back("bounds.csv", text);
        } else if (sub == polar) {
            PolarCase pc;
            pc.measure = q_m.load();
            pc.name = "polar_check";
            pc.center = q_center.empty() ? Vec::zero(pc.measure.d) : parse_point(q_center, pc.measure.d, "--at");
            pc.f0 = q_f0;
            pc.tol = q_tol;
            if (!parse_density(q_f0).is_radial()) throw UsageError("--f0 must depend on r only");
            const PolarComparison c = compare_polar(pc);
            ScanReport rep;
            rep.title = "polar_check";
            rep.header = {{"d", std::to_string(pc.measure.d)}, {"measure", pc.measure.label}, {"f0", pc.f0}};
            rep.columns = {"polar_re", "polar_im", "direct_re", "direct_im", "scaled_gap", "tol"};
            rep.add_row({c.polar.real(), c.polar.imag(), c.direct.real(), c.direct.imag(), c.scaled_gap, c.tol});
            if (c.mass_gap) rep.note("mass_gap", *c.mass_gap);
            rep.note("verdict", c.pass() ? "pass" : "fail");
            if (!c.pass()) o.code = kFailed;
            hold(o, "polar-check", std::move(rep), *sub, out_dir);
        } else if (sub == suite) {
            SuiteConfig cfg = u_config.empty() ? default_suite_config(u_name) : load_suite_config(u_config);
            if (cfg.suite != u_name)
                throw UsageError("config '" + u_config + "' is for suite '" + cfg.suite + "', not '" + u_name + "'");
            if (suite->get_option("--seed")->count() > 0) cfg.seed = seed;
            if (auto tol = env_quad_tol()) cfg.settings.quad_rel_tol = *tol;
            if (!u_texp.empty()) {
                cfg.settings.t_first = u_texp[0];
                cfg.settings.t_last = u_texp[1];
            }
            if (u_rlevels) cfg.settings.r_levels = *u_rlevels;
            try {
                cfg.settings.validate();
            } catch (const ConfigError& e) {
                throw UsageError(e.what());
            }
            if (u_print) {
                o.text = suite_config_to_json(cfg).dump(2) + "\n";
            } else {
                SuiteResult res = run_suite(cfg, jobs);
                Json cli = Json::object();
                for (const auto& [k, v] : echo_flags(*sub)) cli[k] = v;
                res.config["cli"] = cli;
                std::string s = "suite " + res.suite + ": " + (res.pass() ? "PASS" : "FAIL") + "\n";
                for (const auto& c : res.cases) {
                    s += "  " + c.name + ": " + (c.pass() ? "pass" : "FAIL") + "\n";
                    if (!c.error.empty()) s += "    error: " + c.error + "\n";
                    for (const auto& ch : c.checks)
                        if (!ch.pass) s += "    failed " + ch.name + ": " + ch.detail + "\n";
                }
                o.text = s;
                o.code = res.pass() ? kOk : kFailed;
                if (out_dir.empty()) out_dir = "runs";
                o.suite = std::move(res);
            }
        } else if (sub == calibrate) {
            const double sd = std::sqrt(static_cast<double>(c_d));
            const double cd = calibrate_cd(c_d);
            const double check = std::exp(-0.25 * sd) / hpl::detail::gaussian_image_unit_cd(c_d, 0.25, 1e-12);
            KernelConfig cfg = kernel_config(c_d);
            const Vec x = Vec::unit(c_d, 0);
            const double expected = std::exp(-0.5 * sd) * std::exp(-0.5);
            const ApplyResult r = apply_detailed(cfg, corpus::gaussian(c_d), 0.5, x);
            ScanReport rep;
            rep.title = "calibrate";
            rep.header = {{"d", std::to_string(c_d)}};
            rep.columns = {"c_d", "c_d_closed_form", "c_d_at_t_quarter", "t_independence_gap", "verification_residual"};
            rep.add_row({cd, cd_closed_form(c_d), check, std::abs(check - cd) / cd,
                         std::abs(r.value.real() - expected) / expected},
                        r.flag());
            rep.note("verification_point", "t=0.5 x=e1");
            if (any_flag(rep, false)) o.code = kNumeric;
            hold(o, "calibrate", std::move(rep), *sub, out_dir);
        }
    } catch (const UsageError& e) {
        return usage(e.what(), sub);
    } catch (const ConfigError& e) {
        return usage(e.what(), sub);
    } catch (const ParseError& e) {
        return usage(e.what(), sub);
    } catch (const DomainError& e) {
        return usage(e.what(), sub);
    } catch (const QuadratureError& e) {
        err << "hpl: numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const CubatureError& e) {
        err << "hpl: numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const CalibrationError& e) {
        err << "hpl: numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        err << "hpl: " << e.what() << "\n";
        return kNumeric;
    }

    try {
        if (o.suite) {
            write_suite(*o.suite, out_dir);
        } else if (!o.files.empty()) {
            std::filesystem::create_directories(out_dir);
            for (const auto& [name, content] : o.files)
                write_text_file((std::filesystem::path(out_dir) / name).string(), content);
        }
    } catch (const std::exception& e) {
        return usage(std::string("cannot write output: ") + e.what(), sub);
    }
    out << o.text << std::flush;
    return o.code;
}

}  // namespace hpl::cli
