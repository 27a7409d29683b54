#pragma once

// P_t applied to compactly supported complex measures, the correction term
// of the Lebesgue-point argument, a finite-difference PDE check, and cone
// scans for non-tangential limits.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hpl/core.hpp"
#include "hpl/cubature.hpp"
#include "hpl/differentiation.hpp"
#include "hpl/kernel.hpp"
#include "hpl/measure.hpp"
#include "hpl/quadrature.hpp"
#include "hpl/report.hpp"
#include "hpl/trend.hpp"

namespace hpl {

struct ApplyOptions {
    CubatureOptions cubature{};
    /// Tabulate the kernel on each term's support and integrate against the
    /// interpolant. Direct evaluation is exact to kernel tolerance but costs
    /// one kernel quadrature per node.
    bool use_profile = true;
    double profile_rel_tol = 1e-11;
    /// Kernel tolerance for atoms (the kernel peak dominates near them).
    double atom_rel_tol = 1e-11;
};

struct ApplyResult {
    Complex value;
    double error = 0.0;
    std::size_t kernel_evaluations = 0;
    bool converged = true;
    bool underflow = false;

    [[nodiscard]] std::string flag() const {
        if (!converged) return "quadrature";
        if (underflow) return "underflow";
        return {};
    }
};

namespace detail {

/// Kernel calls that record failures instead of throwing.
struct KernelTally {
    std::size_t evaluations = 0;
    bool converged = true;
    bool underflow = false;

    double take(const KernelValue& kv) {
        evaluations += 1;
        converged = converged && kv.converged;
        underflow = underflow || kv.underflow;
        return kv.value;
    }
};

/// Radii where the kernel changes on the scale t around distance D.
inline std::vector<double> kernel_breaks(double D, double t, double lo, double hi) {
    std::vector<double> br{lo, hi};
    auto add = [&](double v) {
        if (v > lo && v < hi) br.push_back(v);
    };
    add(D);
    for (int k = -3; k <= 8; ++k) {
        const double s = t * std::ldexp(1.0, k);
        add(D - s);
        add(D + s);
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return br;
}

template <class K>
quad::ChebyshevProfile kernel_profile(K&& kernel, std::vector<double> breaks, double rel_tol) {
    double peak = 0.0;
    for (double b : breaks) peak = std::max(peak, std::abs(kernel(b)));
    return quad::ChebyshevProfile::build(kernel, std::span<const double>(breaks), rel_tol, 20000,
                                         1e-3 * rel_tol * peak);
}

inline CubatureResult<double> apply_radial_term(const KernelConfig& cfg, const AcTerm& term, double t, const Vec& x,
                                                const ApplyOptions& opt, KernelTally& tally) {
    const int d = cfg.d;
    const double R = term.support_radius;
    const double D = dist(x, term.center);
    auto M = [&](double rho) { return tally.take(kernel_sphere_mean(cfg, t, x, term.center, rho)); };
    std::vector<double> br = kernel_breaks(D, t, 0.0, R);
    for (double th : term.thresholds())
        if (th > 0.0 && th < R) br.push_back(th);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    const bool singular = term.singular_at(term.center);
    if (opt.use_profile) {
        // Profile rho^{d-1} M(rho), not M: the profile's absolute floor is
        // set by the peak, and only the weighted function has its peak
        // where the integrand's mass is.
        auto W = [&](double rho) { return std::pow(rho, d - 1) * M(rho); };
        const auto prof = kernel_profile(W, br, opt.profile_rel_tol);
        auto f = [&](double rho) {
            const double fv = term.radial_density(rho);
            return fv == 0.0 ? 0.0 : fv * prof(rho);
        };
        return integrate_interval(f, 0.0, R, br, singular, opt.cubature);
    }
    auto f = [&](double rho) {
        const double fv = term.radial_density(rho);
        return fv == 0.0 ? 0.0 : fv * std::pow(rho, d - 1) * M(rho);
    };
    return integrate_interval(f, 0.0, R, br, singular, opt.cubature);
}

inline CubatureResult<double> apply_line_term(const KernelConfig& cfg, const AcTerm& term, double t, const Vec& x,
                                              const ApplyOptions& opt, KernelTally& tally) {
    const double lo = term.center[0] - term.support_radius, hi = term.center[0] + term.support_radius;
    auto K = [&](double y) { return tally.take(poisson_hermite_eval(cfg, t, x, Vec{y})); };
    std::vector<double> br = kernel_breaks(x[0], t, lo, hi);
    for (double b : line_breaks(term))
        if (b > lo && b < hi) br.push_back(b);
    for (const auto& p : term.removable)
        if (p[0] > lo && p[0] < hi) br.push_back(p[0]);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    const double pivot = line_pivot(term, lo, hi);
    if (opt.use_profile) {
        const auto prof = kernel_profile(K, br, opt.profile_rel_tol);
        auto f = [&](double y) {
            const double fv = term.density(Vec{y});
            return fv == 0.0 ? 0.0 : fv * prof(y);
        };
        return line_integral(f, lo, hi, pivot, br, opt.cubature);
    }
    auto f = [&](double y) {
        const double fv = term.density(Vec{y});
        return fv == 0.0 ? 0.0 : fv * K(y);
    };
    return line_integral(f, lo, hi, pivot, br, opt.cubature);
}

inline CubatureResult<double> apply_general_term(const KernelConfig& cfg, const AcTerm& term, double t, const Vec& x,
                                                 const ApplyOptions& opt, KernelTally& tally) {
    PolarSetup s;
    s.frame = term.center;
    s.axis = x - term.center;
    s.singular_at_frame = term.singular_at(term.center);
    s.domain = {{term.center, term.support_radius}};
    for (double th : term.expr.radial_thresholds()) s.jumps.push_back({term.center, th});
    s.jumps.insert(s.jumps.end(), term.jumps.begin(), term.jumps.end());
    const double D = dist(x, term.center);
    for (double b : kernel_breaks(D, t, 0.0, term.support_radius)) s.focus.push_back(b);
    return polar_cubature(
        s,
        [&](const Vec& y) {
            const double fv = term.density(y);
            return fv == 0.0 ? 0.0 : fv * tally.take(poisson_hermite_eval(cfg, t, x, y));
        },
        opt.cubature);
}

}  // namespace detail

/// P_t nu(x) with status flags instead of exceptions.
[[nodiscard]] inline ApplyResult apply_detailed(const KernelConfig& cfg, const ComplexMeasure& nu, double t,
                                                const Vec& x, const ApplyOptions& opt = {}) {
    if (!(t > 0.0)) throw DomainError("apply: t must be positive");
    if (x.dim() != nu.d || cfg.d != nu.d) throw DomainError("apply: dimension mismatch");
    ApplyResult out;
    detail::KernelTally tally;
    for (const auto& term : nu.ac) {
        CubatureResult<double> r;
        if (term.radial()) r = detail::apply_radial_term(cfg, term, t, x, opt, tally);
        else if (nu.d == 1) r = detail::apply_line_term(cfg, term, t, x, opt, tally);
        else r = detail::apply_general_term(cfg, term, t, x, opt, tally);
        out.value += term.coeff * r.value;
        out.error += std::abs(term.coeff) * r.error;
        out.converged = out.converged && r.converged;
    }
    KernelConfig tight = cfg;
    tight.quad_rel_tol = std::min(cfg.quad_rel_tol, opt.atom_rel_tol);
    for (const auto& a : nu.atoms) {
        const KernelValue kv = poisson_hermite_eval(tight, t, x, a.point);
        out.value += a.weight * tally.take(kv);
        out.error += std::abs(a.weight) * kv.error;
    }
    if (nu.singular) {
        const auto r = cantor_integrate(
            *nu.singular, [&](double y) { return tally.take(poisson_hermite_eval(cfg, t, x, Vec{y})); },
            opt.cubature);
        out.value += r.value;
        out.error += r.error;
        out.converged = out.converged && r.converged;
    }
    out.kernel_evaluations = tally.evaluations;
    out.converged = out.converged && tally.converged;
    out.underflow = tally.underflow;
    return out;
}

/// P_t nu(x) = Int P_t(x, y) dnu(y).
[[nodiscard]] inline Complex apply(const KernelConfig& cfg, const ComplexMeasure& nu, double t, const Vec& x,
                                   const ApplyOptions& opt = {}) {
    const ApplyResult r = apply_detailed(cfg, nu, t, x, opt);
    if (!r.converged) throw QuadratureError("apply: integration did not reach tolerance", r.error);
    return r.value;
}

/// P_t(|nu - ell dy|)(x), with ell dy restricted to `work`.
[[nodiscard]] inline double apply_tv(const KernelConfig& cfg, const ComplexMeasure& nu, Complex ell, double t,
                                     const Vec& x, const Ball& work, const ApplyOptions& opt = {}) {
    return apply(cfg, total_variation(subtract_lebesgue(nu, ell, work)), t, x, opt).real();
}

[[nodiscard]] inline double apply_tv(const KernelConfig& cfg, const ComplexMeasure& nu, Complex ell, double t,
                                     const Vec& x, const ApplyOptions& opt = {}) {
    return apply_tv(cfg, nu, ell, t, x, working_ball(nu, Vec::zero(nu.d)), opt);
}

/// E(t,x) = (P_t nu(x) - ell) - P_t(nu - ell dy)(x). By linearity this is
/// ell (P_t 1_work(x) - 1), which is how it is evaluated: the nu parts
/// cancel exactly instead of to quadrature tolerance.
[[nodiscard]] inline Complex correction_E(const KernelConfig& cfg, const ComplexMeasure& nu, Complex ell, double t,
                                          const Vec& x, const Ball& work, const ApplyOptions& opt = {}) {
    if (ell == Complex(0.0)) return 0.0;
    ComplexMeasure box;
    box.d = nu.d;
    box.ac.push_back({1.0, DensityExpr::constant(1.0), work.center, work.radius, {}, {}});
    return ell * (apply(cfg, box, t, x, opt) - 1.0);
}

[[nodiscard]] inline Complex correction_E(const KernelConfig& cfg, const ComplexMeasure& nu, Complex ell, double t,
                                          const Vec& x, const ApplyOptions& opt = {}) {
    return correction_E(cfg, nu, ell, t, x, working_ball(nu, Vec::zero(nu.d)), opt);
}

// ---------------------------------------------------------------------------
// PDE residual
// ---------------------------------------------------------------------------

struct PdeOptions {
    double abs_floor = 1e-12;
    /// Kernel and integration tolerance for the finite differences; second
    /// differences amplify noise by 1/h^2.
    double rel_tol = 1e-12;
};

/// |u_tt + Lap_x u - |x|^2 u| / max(|u|, abs_floor) for u = P_t nu, by
/// central second differences with step h (default 1e-3 t). Evaluated
/// without kernel profiles so that the differences see the kernel itself.
[[nodiscard]] inline double pde_residual(const KernelConfig& cfg, const ComplexMeasure& nu, double t, const Vec& x,
                                         double h = 0.0, const PdeOptions& popt = {}) {
    if (h == 0.0) h = 1e-3 * t;
    if (!(h > 0.0) || !(t > 2.0 * h)) throw PreconditionError("pde_residual: need 0 < 2h < t");
    KernelConfig c = cfg;
    c.quad_rel_tol = std::min(cfg.quad_rel_tol, popt.rel_tol);
    c.quad_abs_tol = std::min(cfg.quad_abs_tol, 1e-15);
    c.max_intervals = std::max<std::size_t>(cfg.max_intervals, 2000);
    ApplyOptions opt;
    opt.use_profile = false;
    opt.cubature.rel_tol = popt.rel_tol;
    opt.cubature.abs_tol = 1e-16;
    opt.atom_rel_tol = popt.rel_tol;
    auto u = [&](double tt, const Vec& xx) { return apply(c, nu, tt, xx, opt); };
    const Complex u0 = u(t, x);
    Complex lap = 0.0;
    for (int i = 0; i < nu.d; ++i) {
        const Vec e = Vec::unit(nu.d, i) * h;
        lap += (u(t, x + e) - 2.0 * u0 + u(t, x - e)) / (h * h);
    }
    const Complex utt = (u(t + h, x) - 2.0 * u0 + u(t - h, x)) / (h * h);
    return std::abs(utt + lap - norm2(x) * u0) / std::max(std::abs(u0), popt.abs_floor);
}

// ---------------------------------------------------------------------------
// Cone scans
// ---------------------------------------------------------------------------

[[nodiscard]] inline std::vector<double> dyadic_times(int k_first = 3, int k_last = 13) {
    std::vector<double> g;
    for (int k = k_first; k <= k_last; ++k) g.push_back(std::ldexp(1.0, -k));
    return g;
}

struct ConeScanSpec {
    ConeParams cone;
    std::vector<double> t_grid = dyadic_times();
    std::vector<double> aperture_fracs{0.0, 0.5, 1.0};
    /// Empty means the default: +-e1 and two seeded random unit vectors
    /// (duplicates dropped).
    std::vector<Vec> directions;
    std::optional<Complex> expected_ell;
    std::uint64_t seed = 0;

    void validate(int d) const {
        cone.validate();
        if (cone.x0.dim() != d) throw DomainError("cone scan: x0 has wrong dimension");
        if (t_grid.empty()) throw DomainError("cone scan: empty t grid");
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            if (!(t_grid[i] > 0.0)) throw DomainError("cone scan: t must be positive");
            if (i > 0 && !(t_grid[i] < t_grid[i - 1])) throw DomainError("cone scan: t grid must be strictly decreasing");
        }
        for (double f : aperture_fracs)
            if (!(f >= 0.0 && f <= 1.0)) throw DomainError("cone scan: aperture fractions must lie in [0,1]");
        for (const auto& v : directions)
            if (v.dim() != d || !(norm(v) > 0.0)) throw DomainError("cone scan: bad direction");
    }

    [[nodiscard]] std::vector<Vec> resolved_directions(int d) const {
        if (!directions.empty()) {
            std::vector<Vec> out;
            for (const auto& v : directions) out.push_back(v * (1.0 / norm(v)));
            return out;
        }
        std::vector<Vec> out{Vec::unit(d, 0), -Vec::unit(d, 0)};
        Rng rng(seed);
        for (int k = 0; k < 2; ++k) {
            // In d = 1 every unit vector is +-e1 already.
            const Vec v = rng.unit_vector(d);
            if (std::none_of(out.begin(), out.end(), [&](const Vec& u) { return dist(u, v) < 1e-12; }))
                out.push_back(v);
        }
        return out;
    }
};

/// What the scan measures at each sample point.
enum class ConeQuantity {
    residual,  ///< |P_t nu(x) - ell|
    tv,        ///< P_t(|nu - ell dy|)(x)
};

struct ConeScanOptions {
    ApplyOptions apply{};
    DiffOptions diff{};
    ConeQuantity quantity = ConeQuantity::residual;
    /// Working ball for the ell dy term; defaults to working_ball(nu, x0).
    std::optional<Ball> work;
    unsigned jobs = 1;
};

/// Rows (t, frac, dir_index, x..., re, im, abs_residual) ordered by
/// (t-index, direction-index, frac-index); frac = 0 is sampled once per t.
/// Summary: ell, per-t sup over the sampled cross-section (a lower bound
/// for the true sup), its trend and log-log slope.
[[nodiscard]] inline ScanReport cone_scan(const KernelConfig& cfg, const ComplexMeasure& nu, const ConeScanSpec& spec,
                                          const ConeScanOptions& opt = {}) {
    spec.validate(nu.d);
    const int d = nu.d;
    const Complex ell = spec.expected_ell ? *spec.expected_ell
                                          : symmetric_derivative(nu, spec.cone.x0, dyadic_grid(), opt.diff).ell;
    const auto dirs = spec.resolved_directions(d);
    struct Sample {
        std::size_t ti;
        double frac;
        int dir;
        Vec x;
    };
    std::vector<Sample> samples;
    for (std::size_t ti = 0; ti < spec.t_grid.size(); ++ti) {
        const double t = spec.t_grid[ti];
        for (std::size_t k = 0; k < dirs.size(); ++k)
            for (double f : spec.aperture_fracs) {
                if (f == 0.0 && k > 0) continue;
                samples.push_back({ti, f, static_cast<int>(k), spec.cone.x0 + dirs[k] * (f * spec.cone.alpha * t)});
            }
    }
    std::shared_ptr<const ComplexMeasure> target;
    if (opt.quantity == ConeQuantity::tv) {
        const Ball work = opt.work.value_or(working_ball(nu, spec.cone.x0));
        target = std::make_shared<ComplexMeasure>(total_variation(subtract_lebesgue(nu, ell, work)));
    } else {
        target = std::make_shared<ComplexMeasure>(nu);
    }
    std::vector<ApplyResult> results(samples.size());
    std::vector<std::string> errors(samples.size());
    parallel_for(samples.size(), opt.jobs, [&](std::size_t i) {
        try {
            results[i] = apply_detailed(cfg, *target, spec.t_grid[samples[i].ti], samples[i].x, opt.apply);
        } catch (const Error& e) {
            results[i].converged = false;
            errors[i] = "error";
        }
    });

    ScanReport rep;
    rep.title = opt.quantity == ConeQuantity::tv ? "cone_scan_tv" : "cone_scan";
    rep.header = {{"d", std::to_string(d)},
                  {"alpha", format_double(spec.cone.alpha)},
                  {"seed", std::to_string(spec.seed)},
                  {"quantity", opt.quantity == ConeQuantity::tv ? "tv" : "residual"}};
    std::string x0s;
    for (int i = 0; i < d; ++i) x0s += (i ? " " : "") + format_double(spec.cone.x0[i]);
    rep.header.emplace_back("x0", x0s);
    rep.columns = {"t", "frac", "dir_index"};
    for (int i = 0; i < d; ++i) rep.columns.push_back("x" + std::to_string(i + 1));
    rep.columns.insert(rep.columns.end(), {"re", "im", "abs_residual"});
    std::vector<double> sup(spec.t_grid.size(), 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const Complex v = results[i].value;
        const double res = opt.quantity == ConeQuantity::tv ? std::abs(v) : std::abs(v - ell);
        std::vector<double> row{spec.t_grid[s.ti], s.frac, static_cast<double>(s.dir)};
        for (int k = 0; k < d; ++k) row.push_back(s.x[k]);
        row.insert(row.end(), {v.real(), v.imag(), res});
        std::string flag = errors[i].empty() ? results[i].flag() : errors[i];
        rep.add_row(std::move(row), flag);
        sup[s.ti] = std::max(sup[s.ti], res);
    }
    const Trend tr = analyze_trend(spec.t_grid, sup, opt.diff.trend);
    rep.note("ell_re", ell.real());
    rep.note("ell_im", ell.imag());
    for (std::size_t ti = 0; ti < sup.size(); ++ti) rep.note("sup_t" + std::to_string(ti), sup[ti]);
    rep.note("trend_ratio", tr.ratio);
    rep.note("trend_final", tr.last);
    rep.note("trend_slope", tr.slope);
    rep.note("trend_ratio_threshold", opt.diff.trend.ratio);
    rep.note("trend_final_threshold", opt.diff.trend.final_value);
    rep.note("trend_verdict", tr.verdict());
    return rep;
}

/// Trend of the per-t sup column recorded by cone_scan.
[[nodiscard]] inline Trend cone_trend(const ScanReport& rep, const TrendThresholds& th = {}) {
    std::vector<double> ts, sups;
    const auto tcol = rep.column_values("t");
    const auto rcol = rep.column_values("abs_residual");
    for (std::size_t i = 0; i < tcol.size(); ++i) {
        if (ts.empty() || tcol[i] != ts.back()) {
            ts.push_back(tcol[i]);
            sups.push_back(0.0);
        }
        sups.back() = std::max(sups.back(), rcol[i]);
    }
    return analyze_trend(ts, sups, th);
}

}  // namespace hpl
