#pragma once

// Integration over balls in R^d in polar coordinates.
//
// Two ingredients are shared by all measure and semigroup computations:
//  - a 1-D radial integrator that approaches a removable singular endpoint
//    through dyadic shells, stopping once shells become negligible or
//    extrapolating a geometric tail when shell contributions settle into a
//    fixed ratio;
//  - a product rule on S^{d-1} (Gauss-Legendre in the polar angle with the
//    sin^{d-2} weight, recursively on S^{d-2}) for integrands without
//    rotational symmetry, with per-ray clipping to an intersection of balls
//    and breakpoints where the ray crosses discontinuity spheres.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "hpl/core.hpp"
#include "hpl/quadrature.hpp"

namespace hpl {

struct CubatureOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::size_t max_intervals = 20000;
    int angular_order = 16;
    int max_shells = 48;
    /// Shell contributions must settle to within this ratio change before a
    /// geometric tail is extrapolated.
    double tail_ratio_tol = 0.02;
    /// Cap on the panels (uniform in 1/rho) that pre-split one singular shell.
    double max_oscillation_panels = 262144;
};

template <class T>
struct CubatureResult {
    T value{};
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
    bool extrapolated = false;

    CubatureResult& operator+=(const CubatureResult& o) {
        value += o.value;
        error += o.error;
        evaluations += o.evaluations;
        converged = converged && o.converged;
        extrapolated = extrapolated || o.extrapolated;
        return *this;
    }
};

struct Ball {
    Vec center;
    double radius;
};

// ---------------------------------------------------------------------------
// Spherical caps
// ---------------------------------------------------------------------------

/// Measure of {w in S^{d-1} : w.e > tau} (counting measure on {+-1} for d=1).
[[nodiscard]] inline double cap_area(int d, double tau) {
    if (d == 1) return (tau < 1.0 ? 1.0 : 0.0) + (tau < -1.0 ? 1.0 : 0.0);
    if (tau >= 1.0) return 0.0;
    if (tau <= -1.0) return sphere_area(d - 1);
    // J_m(tau) = Int_tau^1 (1-z^2)^{m/2} dz by the two-step recurrence.
    const int m = d - 3;
    const double one_minus = (1.0 - tau) * (1.0 + tau);
    double j_prev = std::acos(tau);  // m = -1
    double j_cur = 1.0 - tau;        // m = 0
    double j = 0.0;
    if (m == -1) j = j_prev;
    else if (m == 0) j = j_cur;
    else {
        int k = (m % 2 == 0) ? 0 : -1;
        double jk = (m % 2 == 0) ? j_cur : j_prev;
        while (k < m) {
            k += 2;
            jk = (-tau * std::pow(one_minus, 0.5 * k) + k * jk) / (k + 1.0);
        }
        j = jk;
    }
    return sphere_area(d - 2) * j;
}

/// Measure of the set of directions w with |c + rho w - x| < r, where
/// `dist_xc` = |x - c|.
[[nodiscard]] inline double ball_cap_area(int d, double dist_xc, double rho, double r) {
    if (rho == 0.0) return dist_xc < r ? sphere_area(d - 1) : 0.0;
    if (dist_xc == 0.0) return rho < r ? sphere_area(d - 1) : 0.0;
    const double tau = (rho * rho + dist_xc * dist_xc - r * r) / (2.0 * rho * dist_xc);
    return cap_area(d, tau);
}

// ---------------------------------------------------------------------------
// Radial integration with an optional removable singular endpoint
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
double mag(const T& v) {
    return std::abs(v);
}

inline std::vector<double> breaks_within(double lo, double hi, const std::vector<double>& pts) {
    std::vector<double> out{lo};
    for (double p : pts)
        if (p > lo && p < hi) out.push_back(p);
    out.push_back(hi);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace detail

/// Int_lo^hi f(x) dx with panels split at `breaks`. When `singular_lo` is
/// set, lo is approached through shells [lo + L 2^{-k-1}, lo + L 2^{-k}].
/// Each shell is pre-split where 1/(x - lo) is a multiple of pi, so
/// oscillations of the type sin(1/(x - lo)) are resolved uniformly; the
/// shell sequence stops when two consecutive shells fall below half the
/// target, or extrapolates a geometric tail once the shell ratio settles.
template <class F>
auto integrate_interval(F&& f, double lo, double hi, const std::vector<double>& breaks, bool singular_lo,
                        const CubatureOptions& opt)
    -> CubatureResult<std::decay_t<std::invoke_result_t<F&, double>>> {
    using T = std::decay_t<std::invoke_result_t<F&, double>>;
    CubatureResult<T> out;
    if (!(hi > lo)) return out;
    auto run = [&](double a, double b, double abs_tol, bool oscillation_split) {
        auto br = detail::breaks_within(a, b, breaks);
        std::size_t budget = opt.max_intervals;
        if (oscillation_split) {
            const double va = 1.0 / (a - lo), vb = 1.0 / (b - lo);
            const double k0 = std::ceil(vb / std::numbers::pi), k1 = std::floor(va / std::numbers::pi);
            if (k1 - k0 >= 1.0) {
                // Breaks at 1/(x - lo) = k pi, thinned to the panel cap.
                const double count = k1 - k0 + 1.0;
                const double stride = std::ceil(count / opt.max_oscillation_panels);
                for (double k = k0; k <= k1; k += stride) br.push_back(lo + 1.0 / (k * std::numbers::pi));
                std::sort(br.begin(), br.end());
                br.erase(std::unique(br.begin(), br.end()), br.end());
                budget = std::max(budget, 2 * br.size());
            }
        }
        const quad::Options qopt{opt.rel_tol, abs_tol, budget};
        const auto r = quad::integrate(f, std::span<const double>(br), qopt);
        CubatureResult<T> c;
        c.value = r.value;
        c.error = r.error;
        c.evaluations = r.evaluations;
        c.converged = r.converged;
        return c;
    };
    if (!singular_lo) return run(lo, hi, opt.abs_tol, false);

    const double L = hi - lo;
    out += run(lo + 0.5 * L, hi, opt.abs_tol, true);
    std::vector<T> shells;
    for (int k = 1; k <= opt.max_shells; ++k) {
        const double a = lo + L * std::ldexp(1.0, -(k + 1));
        const double b = lo + L * std::ldexp(1.0, -k);
        if (!(a > lo) || !(b > a)) {
            out.converged = false;
            break;
        }
        const double target = std::max(opt.abs_tol, opt.rel_tol * detail::mag(out.value));
        auto s = run(a, b, 0.125 * target, true);
        // A shell that is resolved to the overall target counts as converged
        // even if its own relative tolerance is out of reach.
        if (!s.converged && s.error <= 0.25 * target) s.converged = true;
        out += s;
        shells.push_back(s.value);
        const std::size_t n = shells.size();
        if (!s.converged) {
            out.error += detail::mag(s.value);
            out.converged = false;
            break;
        }
        if (n >= 2 && detail::mag(shells[n - 1]) + detail::mag(shells[n - 2]) < 0.5 * target) {
            out.error += detail::mag(shells[n - 1]);
            break;
        }
        if (n >= 3 && detail::mag(shells[n - 2]) > 0.0 && detail::mag(shells[n - 3]) > 0.0) {
            const T q1 = shells[n - 1] / shells[n - 2];
            const T q0 = shells[n - 2] / shells[n - 3];
            if (detail::mag(q1 - q0) < opt.tail_ratio_tol && detail::mag(q1) < 0.75) {
                const T tail = shells[n - 1] * q1 / (T(1.0) - q1);
                const double tail_err = detail::mag(tail) * detail::mag(q1 - q0) / (1.0 - detail::mag(q1));
                if (tail_err < 0.5 * target) {
                    out.value += tail;
                    out.error += tail_err;
                    out.extrapolated = true;
                    break;
                }
            }
        }
        if (k == opt.max_shells) {
            out.error += detail::mag(shells[n - 1]);
            out.converged = false;
        }
    }
    if (out.error > std::max(opt.abs_tol, opt.rel_tol * detail::mag(out.value)) * 10.0) out.converged = false;
    return out;
}

/// Int_lo^hi h(y) dy on a line where h may be singular at `pivot`. The
/// values at pivot + rho and pivot - rho are integrated together, so odd
/// oscillating parts cancel before they are integrated.
template <class H>
auto line_integral(H&& h, double lo, double hi, double pivot, const std::vector<double>& breaks,
                   const CubatureOptions& opt)
    -> CubatureResult<std::decay_t<std::invoke_result_t<H&, double>>> {
    using T = std::decay_t<std::invoke_result_t<H&, double>>;
    CubatureResult<T> out;
    if (!(hi > lo)) return out;
    if (!(pivot >= lo && pivot <= hi)) return integrate_interval(h, lo, hi, breaks, false, opt);
    const double m = std::min(pivot - lo, hi - pivot);
    std::vector<double> rb;
    for (double b : breaks) rb.push_back(std::abs(b - pivot));
    if (m > 0.0)
        out += integrate_interval([&](double rho) -> T { return h(pivot + rho) + h(pivot - rho); }, 0.0, m, rb,
                                  true, opt);
    if (hi - pivot > m) out += integrate_interval([&](double rho) -> T { return h(pivot + rho); }, m, hi - pivot, rb,
                                                  m == 0.0, opt);
    else if (pivot - lo > m)
        out += integrate_interval([&](double rho) -> T { return h(pivot - rho); }, m, pivot - lo, rb, m == 0.0, opt);
    return out;
}

// ---------------------------------------------------------------------------
// Product rule on the sphere
// ---------------------------------------------------------------------------

struct SphereRule {
    std::vector<Vec> directions;
    std::vector<double> weights;
};

namespace detail {

/// Rule on S^{m-1} in coordinates where the polar axis is the first axis.
inline void sphere_rule_rec(int m, int order, std::vector<std::vector<double>>& dirs, std::vector<double>& w) {
    dirs.clear();
    w.clear();
    if (m == 1) {
        dirs = {{1.0}, {-1.0}};
        w = {1.0, 1.0};
        return;
    }
    if (m == 2) {
        const int n = 2 * order;
        for (int i = 0; i < n; ++i) {
            const double a = 2.0 * std::numbers::pi * (i + 0.5) / n;
            dirs.push_back({std::cos(a), std::sin(a)});
            w.push_back(2.0 * std::numbers::pi / n);
        }
        return;
    }
    std::vector<std::vector<double>> sub;
    std::vector<double> subw;
    sphere_rule_rec(m - 1, order, sub, subw);
    const auto& gl = quad::gauss_legendre(order);
    for (int i = 0; i < order; ++i) {
        const double th = 0.5 * std::numbers::pi * (gl.nodes[static_cast<std::size_t>(i)] + 1.0);
        const double wt = 0.5 * std::numbers::pi * gl.weights[static_cast<std::size_t>(i)] *
                          std::pow(std::sin(th), m - 2);
        for (std::size_t j = 0; j < sub.size(); ++j) {
            std::vector<double> v(static_cast<std::size_t>(m));
            v[0] = std::cos(th);
            for (int k = 1; k < m; ++k) v[static_cast<std::size_t>(k)] = std::sin(th) * sub[j][static_cast<std::size_t>(k - 1)];
            dirs.push_back(std::move(v));
            w.push_back(wt * subw[j]);
        }
    }
}

}  // namespace detail

/// Product rule on S^{d-1} whose polar axis is `axis` (any nonzero vector).
[[nodiscard]] inline SphereRule sphere_rule(int d, int order, const Vec& axis) {
    std::vector<std::vector<double>> raw;
    std::vector<double> w;
    detail::sphere_rule_rec(d, order, raw, w);
    // Householder reflection taking e1 to the unit axis.
    Vec a = axis;
    const double na = norm(a);
    Vec e1 = Vec::unit(d, 0);
    Vec h = na > 0.0 ? a * (1.0 / na) - e1 : Vec(d);
    const double hh = norm2(h);
    SphereRule rule;
    rule.weights = std::move(w);
    rule.directions.reserve(raw.size());
    for (const auto& r : raw) {
        Vec v(r);
        if (hh > 1e-30) v -= h * (2.0 * dot(h, v) / hh);
        rule.directions.push_back(v);
    }
    return rule;
}

// ---------------------------------------------------------------------------
// Generic polar cubature
// ---------------------------------------------------------------------------

namespace detail {

/// {rho >= 0 : |p + rho w - c| < R} as [lo, hi]; empty when lo >= hi.
inline std::pair<double, double> ray_ball(const Vec& p, const Vec& w, const Vec& c, double R) {
    const Vec q = p - c;
    const double bq = dot(q, w);
    const double disc = bq * bq - (norm2(q) - R * R);
    if (disc <= 0.0) return {0.0, 0.0};
    const double sq = std::sqrt(disc);
    return {std::max(0.0, -bq - sq), -bq + sq};
}

/// Positive roots of |p + rho w - c| = R.
inline void ray_sphere_roots(const Vec& p, const Vec& w, const Vec& c, double R, std::vector<double>& out) {
    const Vec q = p - c;
    const double bq = dot(q, w);
    const double disc = bq * bq - (norm2(q) - R * R);
    if (disc <= 0.0) return;
    const double sq = std::sqrt(disc);
    if (-bq - sq > 0.0) out.push_back(-bq - sq);
    if (-bq + sq > 0.0) out.push_back(-bq + sq);
}

}  // namespace detail

struct PolarSetup {
    Vec frame;                     ///< origin of the polar frame
    Vec axis;                      ///< polar axis of the angular rule (may be zero)
    std::vector<Ball> domain;      ///< integrate over the intersection of these balls
    std::vector<Ball> jumps;       ///< spheres across which the integrand may jump
    std::vector<double> focus;     ///< extra radial breakpoints (distances from frame)
    bool singular_at_frame = false;
};

namespace detail {

/// Polar angles (about `e`, seen from p) of rays that are tangent to a
/// sphere or pass through the intersection of two spheres. Along such rays
/// the radial limits are not smooth in the angle.
inline std::vector<double> critical_angles(const Vec& p, const Vec& e, const std::vector<Ball>& spheres) {
    std::vector<double> out;
    const double pi = std::numbers::pi;
    auto push = [&](double c) {
        if (std::isfinite(c) && c > -1.0 && c < 1.0) out.push_back(std::acos(c));
    };
    struct Axial {
        double s, R, off;  // axial position, radius, distance off the axis
    };
    std::vector<Axial> ax;
    for (const auto& b : spheres) {
        const Vec q = b.center - p;
        const double s_ax = dot(q, e);
        const double off = norm(q - e * s_ax);
        ax.push_back({s_ax, b.radius, off});
        const double D = norm(q);
        if (D > b.radius && D > 0.0) {
            // Tangent cone: angle between q and w equals asin(R/D).
            const double half = std::asin(b.radius / D);
            const double c0 = std::acos(std::clamp(s_ax / D, -1.0, 1.0));
            for (double th : {c0 - half, c0 + half})
                if (th > 0.0 && th < pi) out.push_back(th);
        }
    }
    for (std::size_t i = 0; i < ax.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const auto& A = ax[i];
            const auto& B = ax[j];
            if (A.off > 0.0 || B.off > 0.0 || A.s == B.s) continue;
            const double pr = (A.s * A.s - B.s * B.s - A.R * A.R + B.R * B.R) / (2.0 * (A.s - B.s));
            const double rho2 = A.R * A.R - A.s * A.s + 2.0 * A.s * pr;
            if (rho2 > 0.0) push(pr / std::sqrt(rho2));
        }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

/// Int over the intersection of balls of g(y) dy, in polar coordinates about
/// setup.frame. g returns double or Complex. For d >= 2 the polar angle
/// about setup.axis is integrated adaptively with breakpoints at the
/// critical angles; the remaining sphere S^{d-2} uses a fixed product rule,
/// which is exact in the limit when every ball center lies on the axis.
template <class G>
auto polar_cubature(const PolarSetup& setup, G&& g, const CubatureOptions& opt)
    -> CubatureResult<std::decay_t<std::invoke_result_t<G&, const Vec&>>> {
    using T = std::decay_t<std::invoke_result_t<G&, const Vec&>>;
    const int d = setup.frame.dim();
    CubatureResult<T> out;
    CubatureOptions inner = opt;
    inner.rel_tol = 0.1 * opt.rel_tol;
    inner.abs_tol = 0.1 * opt.abs_tol;

    std::vector<double> breaks;
    auto ray = [&](const Vec& w) -> CubatureResult<T> {
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (const auto& b : setup.domain) {
            const auto [l, h] = detail::ray_ball(setup.frame, w, b.center, b.radius);
            lo = std::max(lo, l);
            hi = std::min(hi, h);
        }
        if (!(hi > lo) || !std::isfinite(hi)) return {};
        breaks.clear();
        for (const auto& s : setup.jumps) detail::ray_sphere_roots(setup.frame, w, s.center, s.radius, breaks);
        breaks.insert(breaks.end(), setup.focus.begin(), setup.focus.end());
        auto radial = [&](double rho) -> T {
            Vec y = setup.frame + w * rho;
            return g(y) * std::pow(rho, d - 1);
        };
        return integrate_interval(radial, lo, hi, breaks, setup.singular_at_frame && lo == 0.0, inner);
    };

    if (d == 1) {
        out += ray(Vec{1.0});
        out += ray(Vec{-1.0});
        return out;
    }

    Vec e = setup.axis;
    if (!(norm(e) > 0.0)) e = Vec::unit(d, 0);
    e *= 1.0 / norm(e);
    // Reflection taking e1 to e, applied to (cos th, sin th v).
    Vec h = e - Vec::unit(d, 0);
    const double hh = norm2(h);
    std::vector<std::vector<double>> sub;
    std::vector<double> subw;
    detail::sphere_rule_rec(d - 1, opt.angular_order, sub, subw);

    bool inner_ok = true;
    bool extrapolated = false;
    std::size_t evals = 0;
    double inner_err = 0.0;
    auto theta_integrand = [&](double th) -> T {
        const double c = std::cos(th), sn = std::sin(th);
        T acc{};
        double err = 0.0;
        for (std::size_t j = 0; j < sub.size(); ++j) {
            Vec w(d);
            w[0] = c;
            for (int k = 1; k < d; ++k) w[k] = sn * sub[j][static_cast<std::size_t>(k - 1)];
            if (hh > 1e-30) w -= h * (2.0 * dot(h, w) / hh);
            const auto r = ray(w);
            acc += r.value * subw[j];
            err += r.error * subw[j];
            evals += r.evaluations;
            inner_ok = inner_ok && r.converged;
            extrapolated = extrapolated || r.extrapolated;
        }
        const double jac = std::pow(sn, d - 2);
        inner_err = std::max(inner_err, err * jac);
        return acc * jac;
    };
    std::vector<Ball> spheres = setup.domain;
    spheres.insert(spheres.end(), setup.jumps.begin(), setup.jumps.end());
    std::vector<double> br{0.0};
    for (double a : detail::critical_angles(setup.frame, e, spheres)) br.push_back(a);
    br.push_back(std::numbers::pi);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    const quad::Options qopt{opt.rel_tol, opt.abs_tol, opt.max_intervals / 10 + 50};
    const auto r = quad::integrate(theta_integrand, std::span<const double>(br), qopt);
    out.value = r.value;
    out.error = r.error + inner_err * std::numbers::pi;
    out.evaluations = evals;
    out.converged = r.converged && inner_ok;
    out.extrapolated = extrapolated;
    return out;
}

}  // namespace hpl
