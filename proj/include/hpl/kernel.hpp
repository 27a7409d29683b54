#pragma once

// The Poisson kernel of the Hermite operator L = -Delta + |x|^2,
//
//   P_t(x,y) = c_d t Int_0^1 exp(-t^2/l(s)) (1-s^2)^{d/2-1}
//              exp(-(|x-y|^2/s + s|x+y|^2)/4) / (s^{d/2} l(s)^{3/2}) ds,
//   l(s) = 2 ln((1+s)/(1-s)),
//
// together with its local/global split, the radial/remainder split of the
// local part, the gauge Phi, the classical Poisson kernel and the bound
// ratio reports built from them.
//
// Numerics. With u = l(s)/2 (so s = tanh(u/2)) the integral becomes
//
//   P = (c_d t/2) Int_0^inf exp(L(u)) du,
//   L(u) = -t^2/(2u) - 1.5 ln(2u) + (d/2)(ln 2 - ln sinh u)
//          - (a coth(u/2) + b tanh(u/2))/4,      a = |x-y|^2, b = |x+y|^2,
//
// which has no endpoint singularity for any d. The integral is taken in
// w = ln u, in log space: the log-integrand is scanned on a coarse grid to
// find its maximum and the points where provable monotone bounds drop 80
// units below it, then adaptive Gauss-Kronrod runs on the shifted integrand.
// Tolerances are relative to the result; the absolute tolerance is applied
// in units of the integrand peak, since kernel values span hundreds of
// decades.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "hpl/core.hpp"
#include "hpl/quadrature.hpp"
#include "hpl/report.hpp"

namespace hpl {

struct KernelConfig {
    int d = 1;
    double c_d = 1.0;
    double quad_rel_tol = 1e-9;
    double quad_abs_tol = 1e-12;
    double split_point = 0.5;
    std::size_t max_intervals = 400;

    void validate() const {
        if (d < 1 || d > kMaxDim) throw DomainError("KernelConfig: d must lie in [1, " + std::to_string(kMaxDim) + "]");
        if (!(c_d > 0.0) || !std::isfinite(c_d)) throw DomainError("KernelConfig: c_d must be positive");
        if (!(split_point > 0.0 && split_point < 1.0)) throw DomainError("KernelConfig: split_point must lie in (0,1)");
        if (!(quad_rel_tol > 0.0) || !(quad_abs_tol > 0.0)) throw DomainError("KernelConfig: tolerances must be positive");
    }

    /// Configuration with c_d computed by calibrate_cd.
    static KernelConfig calibrated(int d);
};

struct ConeParams {
    Vec x0;
    double alpha = 1.0;

    void validate() const {
        if (!(alpha > 0.0)) throw DomainError("ConeParams: alpha must be positive");
    }
};

/// Outcome of one kernel quadrature.
struct KernelValue {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool underflow = false;
    bool converged = true;
};

/// Which part of the u-range to integrate.
enum class KernelRange { full, local, global };

// ---------------------------------------------------------------------------
// Elementary functions
// ---------------------------------------------------------------------------

[[nodiscard]] inline double log_ratio(double s) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("log_ratio: s must lie in (0,1)");
    return 2.0 * (std::log1p(s) - std::log1p(-s));
}

[[nodiscard]] inline double phi_radial(int d, double r) {
    return std::exp(-0.5 * r * r) /
           (std::pow(1.0 + r, 0.5 * d) * std::pow(std::log(std::numbers::e + r), 1.5));
}

[[nodiscard]] inline double phi(const Vec& y) { return phi_radial(y.dim(), norm(y)); }

[[nodiscard]] inline double classical_poisson_radial(int d, double t, double r) {
    if (!(t > 0.0)) throw DomainError("classical_poisson: t must be positive");
    return t / std::pow(t * t + r * r, 0.5 * (d + 1));
}

[[nodiscard]] inline double classical_poisson(double t, const Vec& z) {
    return classical_poisson_radial(z.dim(), t, norm(z));
}

/// The normalization obtained in closed form from the Gaussian eigenfunction
/// identity: 4 / (sqrt(pi) (4 pi)^{d/2}). Used as a reference value only;
/// calibrate_cd computes the constant numerically.
[[nodiscard]] inline double cd_closed_form(int d) {
    return 4.0 / (std::sqrt(std::numbers::pi) * std::pow(4.0 * std::numbers::pi, 0.5 * d));
}

// ---------------------------------------------------------------------------
// Core integral
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kTruncation = 80.0;
inline constexpr double kScanStep = 0.5;

[[nodiscard]] inline double log_sinh(double u) {
    return u > 30.0 ? u - kLn2 : std::log(std::sinh(u));
}

/// log of Int_{S^{d-1}} exp(k (w_1 - 1)) dw / |S^{d-1}|, i.e. the normalized
/// Bessel factor Gamma(nu+1) (2/k)^nu I_nu(k) e^{-k} with nu = d/2 - 1.
[[nodiscard]] inline double log_sphere_mean_exp(int d, double k) {
    if (!(k > 0.0)) return 0.0;
    if (d == 1) return std::log1p(std::exp(-2.0 * k)) - kLn2;
    if (d == 3) return k < 1e-8 ? -k + k * k / 6.0 : std::log(-std::expm1(-2.0 * k) / (2.0 * k));
    const double nu = 0.5 * d - 1.0;
    if (k <= 30.0) {
        const double q = 0.25 * k * k;
        double term = 1.0, sum = 1.0;
        for (int j = 1; j < 200; ++j) {
            term *= q / (j * (nu + j));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return std::log(sum) - k;
    }
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < 40; ++j) {
        const double next = -term * (mu - (2.0 * j - 1.0) * (2.0 * j - 1.0)) / (j * 8.0 * k);
        if (std::abs(next) > std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::lgamma(nu + 1.0) + nu * std::log(2.0 / k) - 0.5 * std::log(2.0 * std::numbers::pi * k) +
           std::log(sum);
}

/// Log-integrand in w = ln u. Three forms share the scan bounds:
///  - plain kernel with squared distances a, b;
///  - kernel times |expm1(-tanh(u/2) q)| (remainder of the radial split);
///  - kernel averaged over the sphere |y - c| = rho (sphere mode). Then a and
///    b hold (|x-c| - rho)^2 and (|x+c| - rho)^2, which bound the averaged
///    exponent from above, and log_area is log |S^{d-1}|.
struct LogIntegrand {
    int d;
    double t2, a, b, q;
    bool with_factor;
    bool sphere = false;
    double rho2 = 0.0, u2 = 0.0, v2 = 0.0, uv = 0.0, log_area = 0.0;

    [[nodiscard]] double operator()(double w) const {
        const double u = std::exp(w);
        if (u == 0.0) return -std::numeric_limits<double>::infinity();
        const double th = std::tanh(0.5 * u);
        double f = -0.5 * t2 / u - 1.5 * kLn2 - 0.5 * w + 0.5 * d * (kLn2 - log_sinh(u));
        if (sphere) {
            // -(A/s + s B)/4 + |k| written as -N/D to avoid cancellation.
            const double A = u2 + rho2, B = v2 + rho2;
            const double k = 0.5 * std::sqrt(std::max(0.0, rho2 * (u2 / (th * th) - 2.0 * uv + th * th * v2)));
            const double D = 0.25 * (A / th + th * B) + k;
            const double du = u2 - rho2, dv = v2 - rho2;
            const double N = (du * du / (th * th) + 2.0 * A * B + 8.0 * rho2 * uv + th * th * dv * dv) / 16.0;
            f += (D > 0.0 ? -std::max(0.0, N) / D : 0.0) + log_area + log_sphere_mean_exp(d, k);
            return f;
        }
        f -= 0.25 * (a / th + b * th);
        if (with_factor) f += std::log(std::abs(std::expm1(-th * q)));
        return f;
    }

    [[nodiscard]] double factor_bound() const {
        return (with_factor ? std::log(std::abs(q)) + std::abs(q) : 0.0) + (sphere ? log_area : 0.0);
    }

    /// Upper bound for the log-integrand at every w' >= w.
    [[nodiscard]] double right_bound(double w) const {
        const double u = std::exp(w);
        return -1.5 * kLn2 - 0.5 * w + 0.5 * d * (kLn2 - log_sinh(u)) - 0.25 * a -
               0.25 * b * std::tanh(0.5 * u) + factor_bound();
    }

    /// Largest u for which left_bound is monotone.
    [[nodiscard]] double left_valid_u() const { return (t2 + a) / (d + 1.0); }

    /// Upper bound for the log-integrand at every w' <= w, when
    /// exp(w) <= left_valid_u().
    [[nodiscard]] double left_bound(double w) const {
        const double u = std::exp(w);
        double f = -0.5 * (t2 + a) / u - 0.5 * (d + 1) * w - 1.5 * kLn2 + 0.5 * d * kLn2;
        if (with_factor) f += w + std::log(0.5 * std::abs(q)) + std::abs(q);
        if (sphere) f += log_area;
        return f;
    }
};

/// Integral of exp(F(w)) over [w_lo, w_hi] (either may be infinite),
/// returned as value = exp(log_scale) * scaled.
struct ScaledIntegral {
    double log_scale = -std::numeric_limits<double>::infinity();
    double scaled = 0.0;
    double scaled_error = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
    bool empty = true;
};

inline ScaledIntegral integrate_log_space(const LogIntegrand& F, double w_lo, double w_hi,
                                          double w_split, double rel_tol, double abs_tol,
                                          std::size_t max_intervals) {
    ScaledIntegral out;
    double w0 = std::log(std::max((F.t2 + F.a) / (F.d + 1.0), 1e-300));
    w0 = std::clamp(w0, std::max(w_lo, -690.0), std::min(w_hi, 690.0));

    std::vector<std::pair<double, double>> grid;
    grid.reserve(128);
    double fmax = -std::numeric_limits<double>::infinity();
    std::size_t evals = 0;

    // Scan right from w0.
    double w_right = w0;
    for (double w = w0;; w += kScanStep) {
        if (w >= w_hi) w = w_hi;
        const double f = F(w);
        ++evals;
        grid.emplace_back(w, f);
        fmax = std::max(fmax, f);
        w_right = w;
        if (w >= w_hi) break;
        if (F.right_bound(w) < fmax - kTruncation) break;
        if (w > 700.0) break;
    }
    // Scan left from w0.
    double w_left = w0;
    for (double w = w0 - kScanStep;; w -= kScanStep) {
        if (w <= w_lo) w = w_lo;
        if (w < -690.0) break;
        const double f = F(w);
        ++evals;
        grid.emplace_back(w, f);
        fmax = std::max(fmax, f);
        w_left = w;
        if (w <= w_lo) break;
        if (std::exp(w) <= F.left_valid_u() && F.left_bound(w) < fmax - kTruncation) break;
    }
    out.evaluations = evals;
    if (!std::isfinite(fmax) || !(w_right > w_left)) return out;

    std::sort(grid.begin(), grid.end());
    std::vector<double> breaks{w_left};
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double f = grid[i].second;
        if (f >= grid[i - 1].second && f >= grid[i + 1].second && f > fmax - kTruncation)
            breaks.push_back(grid[i].first);
    }
    if (w_split > w_left && w_split < w_right) breaks.push_back(w_split);
    breaks.push_back(w_right);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    const double shift = fmax;
    auto g = [&](double w) {
        const double v = F(w) - shift;
        return v < -745.0 ? 0.0 : std::exp(v);
    };
    quad::Options opt{rel_tol, abs_tol, max_intervals};
    const auto res = quad::integrate(g, std::span<const double>(breaks), opt);
    out.log_scale = shift;
    out.scaled = res.value;
    out.scaled_error = res.error;
    out.evaluations += res.evaluations;
    out.converged = res.converged;
    out.empty = false;
    return out;
}

}  // namespace detail

namespace detail {

inline KernelValue finish_kernel(const KernelConfig& cfg, double t, const LogIntegrand& F, KernelRange range) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("kernel: t must be positive and finite");
    KernelValue kv;
    const double w_split = std::log(2.0 * std::atanh(cfg.split_point));
    double w_lo = -std::numeric_limits<double>::infinity();
    double w_hi = std::numeric_limits<double>::infinity();
    if (range == KernelRange::local) w_hi = w_split;
    if (range == KernelRange::global) w_lo = w_split;
    const auto si = integrate_log_space(F, w_lo, w_hi, w_split, cfg.quad_rel_tol, cfg.quad_abs_tol,
                                        cfg.max_intervals);
    kv.evaluations = si.evaluations;
    if (si.empty) {
        kv.underflow = true;
        return kv;
    }
    const double log_pref = std::log(0.5 * cfg.c_d * t);
    if (log_pref + si.log_scale < std::log(std::numeric_limits<double>::min()) + 50.0) {
        kv.underflow = true;
        return kv;
    }
    const double scale = std::exp(log_pref + si.log_scale);
    const double sign = F.with_factor ? (F.q > 0.0 ? -1.0 : 1.0) : 1.0;
    kv.value = sign * scale * si.scaled;
    kv.error = scale * si.scaled_error;
    kv.converged = si.converged;
    return kv;
}

}  // namespace detail

/// Kernel integral for squared distances a = |x-y|^2 and b = |x+y|^2 over the
/// requested range. With `with_factor`, the integrand carries the extra
/// factor expm1(-s q), s = tanh(u/2); this is how the remainder of the
/// radial split is computed without cancellation.
[[nodiscard]] inline KernelValue kernel_integral(const KernelConfig& cfg, double t, double a, double b,
                                                 KernelRange range, double q = 0.0, bool with_factor = false) {
    if (with_factor && q == 0.0) return {};
    const detail::LogIntegrand F{cfg.d, t * t, a, b, q, with_factor};
    return detail::finish_kernel(cfg, t, F, range);
}

/// Integral of P_t(x, c + rho w) over the unit sphere w in S^{d-1}
/// (for d = 1 the sum over w = +-1). One s-integral: the angular part is a
/// Bessel function in closed form.
[[nodiscard]] inline KernelValue kernel_sphere_mean(const KernelConfig& cfg, double t, const Vec& x, const Vec& c,
                                                    double rho, KernelRange range = KernelRange::full) {
    if (!(rho >= 0.0)) throw DomainError("kernel_sphere_mean: rho must be nonnegative");
    detail::LogIntegrand F{cfg.d, t * t, 0.0, 0.0, 0.0, false};
    F.sphere = true;
    F.rho2 = rho * rho;
    F.u2 = dist2(x, c);
    F.v2 = norm2(x + c);
    F.uv = norm2(x) - norm2(c);
    F.log_area = std::log(sphere_area(cfg.d - 1));
    const double du = std::sqrt(F.u2) - rho, dv = std::sqrt(F.v2) - rho;
    F.a = du * du;
    F.b = dv * dv;
    return detail::finish_kernel(cfg, t, F, range);
}

namespace detail {

inline double checked(const KernelValue& kv, const char* what) {
    if (!kv.converged) throw QuadratureError(std::string(what) + ": tolerance not reached", kv.error);
    return kv.value;
}

}  // namespace detail

[[nodiscard]] inline KernelValue poisson_hermite_eval(const KernelConfig& cfg, double t, const Vec& x, const Vec& y,
                                                      KernelRange range = KernelRange::full) {
    return kernel_integral(cfg, t, dist2(x, y), norm2(x + y), range);
}

[[nodiscard]] inline double poisson_hermite(const KernelConfig& cfg, double t, const Vec& x, const Vec& y) {
    return detail::checked(poisson_hermite_eval(cfg, t, x, y), "poisson_hermite");
}

/// Part of the kernel integral over s in (0, split_point).
[[nodiscard]] inline double poisson_hermite_local(const KernelConfig& cfg, double t, const Vec& x, const Vec& y) {
    return detail::checked(poisson_hermite_eval(cfg, t, x, y, KernelRange::local), "poisson_hermite_local");
}

/// Part of the kernel integral over s in (split_point, 1).
[[nodiscard]] inline double poisson_hermite_global(const KernelConfig& cfg, double t, const Vec& x, const Vec& y) {
    return detail::checked(poisson_hermite_eval(cfg, t, x, y, KernelRange::global), "poisson_hermite_global");
}

/// Radial part of the local kernel around x: the local integrand with the
/// cross term exp(-s x.h) dropped, as a function of r = |h|.
[[nodiscard]] inline double radial_part(const KernelConfig& cfg, double t, const Vec& x, double r) {
    if (!(r >= 0.0)) throw DomainError("radial_part: r must be nonnegative");
    return detail::checked(kernel_integral(cfg, t, r * r, r * r + 4.0 * norm2(x), KernelRange::local),
                           "radial_part");
}

/// Local kernel at (x, x+h) minus the radial part at |h|, integrated directly
/// with the factor expm1(-s x.h).
[[nodiscard]] inline double remainder_part(const KernelConfig& cfg, double t, const Vec& x, const Vec& h) {
    const double r2 = norm2(h);
    return detail::checked(
        kernel_integral(cfg, t, r2, r2 + 4.0 * norm2(x), KernelRange::local, dot(x, h), true), "remainder_part");
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

namespace detail {

/// Int_{R^d} P_t(x,y) exp(-|y|^2/2) dy / exp(-|x|^2/2) for c_d = 1, with the
/// Gaussian y-integral done in closed form:
///   t (4 pi)^{d/2} Int_0^1 exp(-t^2/l(s)) (1-s)^{d/2-1} (1+s)^{-d/2-1} l(s)^{-3/2} ds.
/// In u = l(s)/2 this is (t (4 pi)^{d/2}/2) Int_0^inf exp(-t^2/(2u) - d u/2) (2u)^{-3/2} du.
inline double gaussian_image_unit_cd(int d, double t, double rel_tol) {
    auto logf = [&](double w) {
        const double u = std::exp(w);
        return -0.5 * t * t / u - 0.5 * d * u - 1.5 * std::log(2.0 * u) + w;
    };
    // Peak of -t^2/(2u) - d u/2 - u/2 ... in w; bracket generously.
    const double w_peak = std::log(std::max(1e-300, t / std::sqrt(static_cast<double>(d))));
    const double fmax = logf(w_peak);
    double lo = w_peak, hi = w_peak;
    while (logf(lo) > fmax - 90.0) lo -= 0.5;
    while (logf(hi) > fmax - 90.0) hi += 0.5;
    const std::array<double, 3> br{lo, w_peak, hi};
    auto g = [&](double w) { return std::exp(logf(w) - fmax); };
    const auto r = quad::integrate(g, std::span<const double>(br), quad::Options{rel_tol * 1e-2, 1e-300, 2000});
    return 0.5 * t * std::pow(4.0 * std::numbers::pi, 0.5 * d) * std::exp(fmax) * r.value;
}

}  // namespace detail

/// Normalization constant making Int P_t(x,y) e^{-|y|^2/2} dy = e^{-t sqrt d} e^{-|x|^2/2}.
/// Computed at t = 1 and verified at t = 0.25.
[[nodiscard]] inline double calibrate_cd(int d) {
    if (d < 1 || d > kMaxDim) throw DomainError("calibrate_cd: d out of range");
    const double sd = std::sqrt(static_cast<double>(d));
    const double cd = std::exp(-sd) / detail::gaussian_image_unit_cd(d, 1.0, 1e-12);
    const double check = std::exp(-0.25 * sd) / detail::gaussian_image_unit_cd(d, 0.25, 1e-12);
    if (std::abs(check - cd) > 1e-5 * cd)
        throw CalibrationError("calibrate_cd: test points disagree (" + format_double(cd) + " vs " +
                               format_double(check) + ")");
    return cd;
}

inline KernelConfig KernelConfig::calibrated(int d) {
    KernelConfig cfg;
    cfg.d = d;
    cfg.c_d = calibrate_cd(d);
    return cfg;
}

// ---------------------------------------------------------------------------
// Bound ratio reports
// ---------------------------------------------------------------------------

/// Per-y rows of P, Phi, p and the ratios P/Phi, P/p and
/// P/(p 1{|y| <= gamma max(|x|,1)} + t Phi), with min/max summaries.
[[nodiscard]] inline ScanReport bound_ratio_report(const KernelConfig& cfg, double t, const Vec& x,
                                                   const std::vector<Vec>& y_grid, double gamma = 2.0) {
    if (!(t > 0.0)) throw DomainError("bound_ratio_report: t must be positive");
    ScanReport rep;
    rep.title = "bound_ratios";
    rep.header = {{"d", std::to_string(cfg.d)}, {"t", format_double(t)}, {"gamma", format_double(gamma)}};
    for (int i = 0; i < x.dim(); ++i) rep.header.emplace_back("x" + std::to_string(i + 1), format_double(x[i]));
    rep.columns = {"y_norm", "P", "Phi", "p", "P_over_Phi", "P_over_p", "P_over_mixed"};
    for (int i = 0; i < x.dim(); ++i) rep.columns.insert(rep.columns.begin() + 1 + i, "y" + std::to_string(i + 1));

    const double reach = gamma * std::max(norm(x), 1.0);
    std::vector<double> mins(3, std::numeric_limits<double>::infinity());
    std::vector<double> maxs(3, 0.0);
    for (const Vec& y : y_grid) {
        std::vector<double> row;
        row.push_back(norm(y));
        for (int i = 0; i < y.dim(); ++i) row.push_back(y[i]);
        std::string flag;
        double P = std::numeric_limits<double>::quiet_NaN();
        try {
            const auto kv = poisson_hermite_eval(cfg, t, x, y);
            if (!kv.converged) flag = "quadrature";
            if (kv.underflow) flag = "underflow";
            P = kv.value;
        } catch (const Error& e) {
            flag = "error";
        }
        const double ph = phi(y);
        const double p = classical_poisson(t, x - y);
        const double mixed = (norm(y) <= reach ? p : 0.0) + t * ph;
        const std::array<double, 3> ratios{P / ph, P / p, P / mixed};
        row.insert(row.end(), {P, ph, p, ratios[0], ratios[1], ratios[2]});
        if (flag.empty())
            for (std::size_t k = 0; k < 3; ++k) {
                mins[k] = std::min(mins[k], ratios[k]);
                maxs[k] = std::max(maxs[k], ratios[k]);
            }
        rep.add_row(std::move(row), flag);
    }
    const std::array<const char*, 3> names{"P_over_Phi", "P_over_p", "P_over_mixed"};
    for (std::size_t k = 0; k < 3; ++k) {
        rep.note(std::string("min_") + names[k], mins[k]);
        rep.note(std::string("max_") + names[k], maxs[k]);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Cone comparability: (|x0-y|+t)/C <= |x-y|+t <= C (|x0-y|+t), C = alpha+1
// ---------------------------------------------------------------------------

struct ConeSample {
    double t;
    Vec x;
    Vec y;
};

namespace detail {

inline long double distance_ld(const Vec& p, const Vec& q) {
    long double s = 0.0L;
    for (int i = 0; i < p.dim(); ++i) {
        const long double d = static_cast<long double>(p[i]) - q[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace detail

struct ComparabilityReport {
    bool pass = true;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double constant = 0.0;
    double max_upper_ratio = 0.0;
    double max_lower_ratio = 0.0;
};

/// Checks the two-sided comparability exactly (in extended precision, no
/// tolerance). Every sample must satisfy |x - x0| <= alpha t.
[[nodiscard]] inline ComparabilityReport cone_comparability_check(const ConeParams& cone,
                                                                  const std::vector<ConeSample>& samples) {
    cone.validate();
    ComparabilityReport rep;
    const long double C = static_cast<long double>(cone.alpha) + 1.0L;
    rep.constant = static_cast<double>(C);
    const auto& ldist = detail::distance_ld;
    for (const auto& smp : samples) {
        const long double t = smp.t;
        if (!(smp.t > 0.0)) throw PreconditionError("cone_comparability_check: t must be positive");
        if (ldist(smp.x, cone.x0) > static_cast<long double>(cone.alpha) * t)
            throw PreconditionError("cone_comparability_check: sample outside the cone");
        const long double near = ldist(smp.x, smp.y) + t;
        const long double far = ldist(cone.x0, smp.y) + t;
        const bool ok = near <= C * far && far <= C * near;
        ++rep.samples;
        if (!ok) ++rep.violations;
        rep.max_upper_ratio = std::max(rep.max_upper_ratio, static_cast<double>(near / far));
        rep.max_lower_ratio = std::max(rep.max_lower_ratio, static_cast<double>(far / near));
    }
    rep.pass = rep.violations == 0;
    return rep;
}

/// Random triples inside the cone: t log-uniform in [t_min, t_max], x uniform
/// in the closed ball of radius alpha t about x0 (every tenth sample exactly
/// on its boundary sphere), y uniform in the ball of radius y_radius.
[[nodiscard]] inline std::vector<ConeSample> sample_cone(const ConeParams& cone, std::size_t n, std::uint64_t seed,
                                                         double t_min = 1e-3, double t_max = 1.0,
                                                         double y_radius = 4.0) {
    cone.validate();
    const int d = cone.x0.dim();
    Rng rng(seed);
    std::vector<ConeSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t_min * std::pow(t_max / t_min, rng.uniform());
        Vec off = (i % 10 == 9) ? rng.unit_vector(d) * (cone.alpha * t) : rng.in_ball(d, cone.alpha * t);
        // Rounding can push a boundary sample a hair outside; pull it back in.
        Vec x = cone.x0 + off;
        while (detail::distance_ld(x, cone.x0) > static_cast<long double>(cone.alpha) * t) {
            off *= (1.0 - 1e-15);
            x = cone.x0 + off;
        }
        out.push_back({t, x, rng.in_ball(d, y_radius) + cone.x0});
    }
    return out;
}

}  // namespace hpl
