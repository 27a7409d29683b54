#pragma once

// Classification of a point x0 relative to a measure: ball averages,
// Lebesgue and sigma residuals, the auxiliary small-ball condition used for
// d >= 4, and the distribution-function view in d = 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hpl/core.hpp"
#include "hpl/measure.hpp"
#include "hpl/report.hpp"
#include "hpl/trend.hpp"

namespace hpl {

/// r_k = r_max 2^{-k}, k = 0..levels.
[[nodiscard]] inline std::vector<double> dyadic_grid(double r_max = 0.5, int levels = 14) {
    if (!(r_max > 0.0) || levels < 0) throw DomainError("dyadic_grid: need r_max > 0 and levels >= 0");
    std::vector<double> g;
    for (int k = 0; k <= levels; ++k) g.push_back(std::ldexp(r_max, -k));
    return g;
}

namespace detail {

inline void check_grid(const std::vector<double>& r_grid) {
    if (r_grid.empty()) throw DomainError("radius grid is empty");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0.0)) throw DomainError("radius grid entries must be positive");
        if (i > 0 && !(r_grid[i] < r_grid[i - 1])) throw DomainError("radius grid must be strictly decreasing");
    }
}

/// Ball-mass tolerance for residual tables: errors are judged relative to
/// the normalization, so the absolute target scales with it.
inline CubatureOptions table_options(const CubatureOptions& base, double normalization, double rel_to_norm) {
    CubatureOptions o = base;
    o.abs_tol = std::max(1e-300, rel_to_norm * normalization);
    return o;
}

}  // namespace detail

struct DiffOptions {
    CubatureOptions cubature{};
    /// Ball masses in residual tables are resolved to this fraction of the
    /// table's normalization.
    double table_tol = 1e-6;
    TrendThresholds trend{};
    /// Enables the Richardson estimate of the symmetric derivative.
    bool richardson = false;
};

struct SymmetricDerivative {
    /// Estimate of D nu(x0): the value at the smallest radius (or the
    /// Richardson estimate when requested).
    Complex ell;
    ResidualTable table;  ///< (r, nu(B_r(x0)) / |B_r|)
    std::optional<Complex> richardson;  ///< set only when requested
};

/// Ball averages nu(B_r(x0)) / |B_r| on the grid. The Richardson estimate
/// assumes an error of order r^2 on the two smallest radii.
[[nodiscard]] inline SymmetricDerivative symmetric_derivative(const ComplexMeasure& nu, const Vec& x0,
                                                            const std::vector<double>& r_grid = dyadic_grid(),
                                                            const DiffOptions& opt = {}) {
    detail::check_grid(r_grid);
    const int d = nu.d;
    SymmetricDerivative out;
    for (double r : r_grid) {
        const double vol = ball_volume(d, r);
        const Complex m = ball_mass(nu, x0, r, false, detail::table_options(opt.cubature, vol, opt.table_tol));
        out.table.add(r, m / vol);
    }
    out.ell = out.table.value.back();
    const std::size_t n = out.table.size();
    if (opt.richardson && n >= 2) {
        const double q = out.table.r[n - 2] / out.table.r[n - 1];
        const double q2 = q * q;
        out.richardson = (q2 * out.table.value[n - 1] - out.table.value[n - 2]) / (q2 - 1.0);
        out.ell = *out.richardson;
    }
    return out;
}

/// (r, |nu - ell dy|(B_r(x0)) / |B_r|).
[[nodiscard]] inline ResidualTable lebesgue_residual(const ComplexMeasure& nu, const Vec& x0, Complex ell,
                                                     const std::vector<double>& r_grid = dyadic_grid(),
                                                     const DiffOptions& opt = {}) {
    detail::check_grid(r_grid);
    const ComplexMeasure tv = total_variation(subtract_lebesgue(nu, ell, working_ball(nu, x0)));
    ResidualTable out;
    for (double r : r_grid) {
        const double vol = ball_volume(nu.d, r);
        const double m = ball_mass(tv, x0, r, false, detail::table_options(opt.cubature, vol, opt.table_tol)).real();
        out.add(r, m / vol);
    }
    return out;
}

struct SigmaProbe {
    double level = 0.0;  ///< |x - x0| + r
    double ratio = 0.0;  ///< |x - x0| / r
    int dir_index = 0;
    Vec x;
    double r = 0.0;
    Complex value;  ///< (nu - ell dy)(B_r(x)) / level^d
};

struct SigmaTable {
    std::vector<SigmaProbe> rows;
    std::vector<double> levels;
    /// Largest |value| over the probes on each level.
    std::vector<double> level_sup;

    [[nodiscard]] std::string to_csv() const {
        std::string s = "r,ratio,dir_index";
        const int d = rows.empty() ? 0 : rows.front().x.dim();
        for (int i = 0; i < d; ++i) s += ",x" + std::to_string(i + 1);
        s += ",ball_radius,re,im,abs\n";
        for (const auto& p : rows) {
            s += format_double(p.level) + ',' + format_double(p.ratio) + ',' + std::to_string(p.dir_index);
            for (int i = 0; i < d; ++i) s += ',' + format_double(p.x[i]);
            s += ',' + format_double(p.r) + ',' + format_double(p.value.real()) + ',' + format_double(p.value.imag()) +
                 ',' + format_double(std::abs(p.value)) + '\n';
        }
        return s;
    }
};

/// Probe directions: +-e_i for every axis, then `random` seeded unit vectors.
[[nodiscard]] inline std::vector<Vec> probe_directions(int d, int random, std::uint64_t seed) {
    std::vector<Vec> dirs;
    for (int i = 0; i < d; ++i) {
        dirs.push_back(Vec::unit(d, i));
        dirs.push_back(-Vec::unit(d, i));
    }
    Rng rng(seed);
    for (int k = 0; k < random; ++k) dirs.push_back(rng.unit_vector(d));
    return dirs;
}

struct SigmaOptions {
    std::vector<double> ratios{0.0, 1.0, 4.0};
    /// Random directions in addition to the 2d axis directions; negative
    /// means d.
    int random_directions = -1;
    std::uint64_t seed = 0;
};

/// |(nu - ell dy)(B_r(x))| / (|x - x0| + r)^d over probes on each level of
/// the grid. The ell dy part is exact: ell |B_r| (each probe ball lies in
/// the working ball).
[[nodiscard]] inline SigmaTable sigma_residual(const ComplexMeasure& nu, const Vec& x0, Complex ell,
                                               const std::vector<double>& levels = dyadic_grid(),
                                               const SigmaOptions& probes = {}, const DiffOptions& opt = {}) {
    detail::check_grid(levels);
    const int d = nu.d;
    const int nrand = probes.random_directions < 0 ? d : probes.random_directions;
    const auto dirs = probe_directions(d, nrand, probes.seed);
    SigmaTable out;
    out.levels = levels;
    for (double s : levels) {
        const double norm_d = std::pow(s, d);
        double sup = 0.0;
        for (double q : probes.ratios) {
            const double r = s / (1.0 + q);
            for (std::size_t k = 0; k < dirs.size(); ++k) {
                if (q == 0.0 && k > 0) break;  // every direction gives x = x0
                SigmaProbe p;
                p.level = s;
                p.ratio = q;
                p.dir_index = static_cast<int>(k);
                p.x = x0 + dirs[k] * (q * r);
                p.r = r;
                const double vol = ball_volume(d, r);
                const Complex m = ball_mass(nu, p.x, r, false, detail::table_options(opt.cubature, norm_d, opt.table_tol));
                p.value = (m - ell * vol) / norm_d;
                sup = std::max(sup, std::abs(p.value));
                out.rows.push_back(p);
            }
        }
        out.level_sup.push_back(sup);
    }
    return out;
}

enum class SmallBallExponent { d_minus_3, d_minus_4 };

/// (r, |nu - ell dy|(B_r(x0)) / r^{d-3}) or with r^{d-4}. The first needs
/// d >= 4 and the second d >= 5 (where it is meant for x0 = 0).
[[nodiscard]] inline ResidualTable d3_residual(const ComplexMeasure& nu, const Vec& x0, Complex ell,
                                               const std::vector<double>& r_grid, SmallBallExponent exponent,
                                               const DiffOptions& opt = {}) {
    detail::check_grid(r_grid);
    const int d = nu.d;
    const int e = exponent == SmallBallExponent::d_minus_3 ? d - 3 : d - 4;
    if (exponent == SmallBallExponent::d_minus_3 && d < 4)
        throw PreconditionError("d3_residual: exponent d-3 requires d >= 4");
    if (exponent == SmallBallExponent::d_minus_4 && d < 5)
        throw PreconditionError("d3_residual: exponent d-4 requires d >= 5");
    const ComplexMeasure tv = total_variation(subtract_lebesgue(nu, ell, working_ball(nu, x0)));
    ResidualTable out;
    for (double r : r_grid) {
        const double scale = std::pow(r, e);
        const double m =
            ball_mass(tv, x0, r, false, detail::table_options(opt.cubature, ball_volume(d, r), opt.table_tol)).real();
        out.add(r, m / scale);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distribution function view (d = 1)
// ---------------------------------------------------------------------------

struct QuotientRow {
    double h;
    Complex symmetric, right, left;
};

class CdfView {
public:
    CdfView(const ComplexMeasure& nu, const CubatureOptions& opt = {}) : nu_(nu), opt_(opt) {
        if (nu.d != 1) throw PreconditionError("cdf_view requires d = 1");
        x_min_ = -nu.extent_from(Vec{0.0}) - 1.0;
    }

    /// F(x) = nu((x_min, x]) with x_min left of the support.
    [[nodiscard]] Complex operator()(double x) const {
        if (!(x > x_min_)) return 0.0;
        const double half = 0.5 * (x - x_min_);
        return ball_mass(nu_, Vec{x_min_ + half}, half, true, opt_);
    }

    [[nodiscard]] double x_min() const { return x_min_; }

    /// Difference quotients of F at x0 for h = 2^{-k}, k = 1..levels.
    [[nodiscard]] std::vector<QuotientRow> quotients(double x0, int levels = 10) const {
        std::vector<QuotientRow> rows;
        const Complex f0 = (*this)(x0);
        for (int k = 1; k <= levels; ++k) {
            const double h = std::ldexp(1.0, -k);
            const Complex fp = (*this)(x0 + h), fm = (*this)(x0 - h);
            rows.push_back({h, (fp - fm) / (2.0 * h), (fp - f0) / h, (f0 - fm) / h});
        }
        return rows;
    }

private:
    ComplexMeasure nu_;
    CubatureOptions opt_;
    double x_min_ = 0.0;
};

[[nodiscard]] inline CdfView cdf_view(const ComplexMeasure& nu, const CubatureOptions& opt = {}) { return CdfView(nu, opt); }

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

enum class Verdict { lebesgue, sigma_only, symmetric_derivative_only, unclassified };

[[nodiscard]] inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::lebesgue: return "lebesgue";
        case Verdict::sigma_only: return "sigma_only";
        case Verdict::symmetric_derivative_only: return "symmetric_derivative_only";
        case Verdict::unclassified: return "unclassified";
    }
    return "unclassified";
}

[[nodiscard]] inline Verdict parse_verdict(const std::string& s) {
    for (Verdict v : {Verdict::lebesgue, Verdict::sigma_only, Verdict::symmetric_derivative_only, Verdict::unclassified})
        if (s == verdict_name(v)) return v;
    throw ConfigError("unknown class '" + s + "'");
}

struct ClassifyOptions {
    std::vector<double> r_grid = dyadic_grid();
    std::optional<Complex> ell;  ///< defaults to the symmetric derivative estimate
    SigmaOptions sigma{};
    DiffOptions diff{};
    /// Also tabulate the small-ball condition (with exponent d-3) for d >= 4.
    bool small_ball = true;
};

struct PointDiagnosis {
    Vec x0;
    Complex ell;
    SymmetricDerivative derivative;
    ResidualTable lebesgue_residuals;
    SigmaTable sigma_residuals;
    std::optional<ResidualTable> d3_residuals;
    Verdict verdict = Verdict::unclassified;
    Trend lebesgue_trend, sigma_trend, derivative_trend;
    std::optional<Trend> d3_trend;
};

/// Differences |v_k - v_{k-1}| of the ball-average table, on radii r_k.
[[nodiscard]] inline Trend derivative_cauchy_trend(const SymmetricDerivative& sd, const TrendThresholds& th) {
    std::vector<double> r, v;
    for (std::size_t i = 1; i < sd.table.size(); ++i) {
        r.push_back(sd.table.r[i]);
        v.push_back(std::abs(sd.table.value[i] - sd.table.value[i - 1]) / (1.0 + std::abs(sd.ell)));
    }
    return analyze_trend(r, v, th);
}

[[nodiscard]] inline PointDiagnosis classify(const ComplexMeasure& nu, const Vec& x0, const ClassifyOptions& opt = {}) {
    PointDiagnosis diag;
    diag.x0 = x0;
    diag.derivative = symmetric_derivative(nu, x0, opt.r_grid, opt.diff);
    diag.ell = opt.ell.value_or(diag.derivative.ell);
    diag.lebesgue_residuals = lebesgue_residual(nu, x0, diag.ell, opt.r_grid, opt.diff);
    diag.sigma_residuals = sigma_residual(nu, x0, diag.ell, opt.r_grid, opt.sigma, opt.diff);
    const auto& th = opt.diff.trend;
    diag.lebesgue_trend = analyze_trend(diag.lebesgue_residuals.r, diag.lebesgue_residuals.abs_values(), th);
    diag.sigma_trend = analyze_trend(diag.sigma_residuals.levels, diag.sigma_residuals.level_sup, th);
    diag.derivative_trend = derivative_cauchy_trend(diag.derivative, th);
    if (opt.small_ball && nu.d >= 4) {
        diag.d3_residuals = d3_residual(nu, x0, diag.ell, opt.r_grid, SmallBallExponent::d_minus_3, opt.diff);
        diag.d3_trend = analyze_trend(diag.d3_residuals->r, diag.d3_residuals->abs_values(), th);
    }
    if (diag.lebesgue_trend.converges) diag.verdict = Verdict::lebesgue;
    else if (diag.sigma_trend.converges) diag.verdict = Verdict::sigma_only;
    else if (diag.derivative_trend.converges) diag.verdict = Verdict::symmetric_derivative_only;
    else diag.verdict = Verdict::unclassified;
    return diag;
}

}  // namespace hpl
