#pragma once

// Compactly supported complex measures on R^d as a sum of
//   - absolutely continuous terms  coeff * f(y - center) dy  on B(center, R),
//   - atoms                       weight * delta_point,
//   - (d = 1 only) a Cantor-type part: the ternary self-similar measure on
//     [a, b] (contraction ratio 1/3) scaled to a complex total mass.
// The three kinds are mutually singular, so total variation acts on each
// kind separately.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "hpl/core.hpp"
#include "hpl/cubature.hpp"
#include "hpl/density.hpp"
#include "hpl/kernel.hpp"

namespace hpl {

struct AcTerm {
    Complex coeff{1.0, 0.0};
    DensityExpr expr;
    Vec center;
    double support_radius = 1.0;
    /// Points (absolute coordinates) where expr may be undefined.
    std::vector<Vec> removable;
    /// Spheres (absolute coordinates) where the density may jump, beyond the
    /// radial thresholds of expr about center.
    std::vector<Ball> jumps;

    [[nodiscard]] bool radial() const { return expr.is_radial(); }

    [[nodiscard]] bool singular_at(const Vec& p) const {
        return std::any_of(removable.begin(), removable.end(), [&](const Vec& q) { return q == p; });
    }

    [[nodiscard]] bool near_removable(const Vec& y) const {
        const double eps = 1e-6 * (1.0 + support_radius);
        return std::any_of(removable.begin(), removable.end(), [&](const Vec& q) { return dist(q, y) <= eps; });
    }

    /// f(y - center) inside the support ball, 0 outside; non-finite values
    /// are 0 next to removable points and an error elsewhere.
    [[nodiscard]] double density(const Vec& y) const {
        const Vec z = y - center;
        const double rho = norm(z);
        if (!(rho < support_radius)) return 0.0;
        const double v = expr.eval(z.begin(), rho);
        if (std::isfinite(v)) return v;
        if (near_removable(y)) return 0.0;
        throw CubatureError("density '" + expr.print() + "' is not finite at a point that is not declared removable");
    }

    /// Radial profile f(rho) for radial expressions.
    [[nodiscard]] double radial_density(double rho) const {
        if (!(rho < support_radius)) return 0.0;
        static const double zeros[kMaxDim] = {};
        const double v = expr.eval(zeros, rho);
        if (std::isfinite(v)) return v;
        if (singular_at(center) && rho <= 1e-6 * (1.0 + support_radius)) return 0.0;
        throw CubatureError("density '" + expr.print() + "' is not finite at radius " + format_double(rho));
    }

    [[nodiscard]] std::vector<double> thresholds() const {
        auto th = expr.radial_thresholds();
        th.push_back(support_radius);
        return th;
    }
};

struct Atom {
    Vec point;
    Complex weight;
};

struct CantorPart {
    double a = 0.0;
    double b = 1.0;
    Complex mass{1.0, 0.0};

    /// Distribution function of the normalized ternary Cantor measure.
    [[nodiscard]] double cdf(double x) const {
        double u = (x - a) / (b - a);
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return 1.0;
        double acc = 0.0, scale = 1.0;
        for (int i = 0; i < 64; ++i) {
            u *= 3.0;
            if (u >= 2.0) {
                acc += 0.5 * scale;
                u -= 2.0;
            } else if (u >= 1.0) {
                return acc + 0.5 * scale;
            }
            scale *= 0.5;
        }
        return acc;
    }

    /// Mass of (lo, hi) (the measure has no atoms, so open and closed agree).
    [[nodiscard]] Complex interval_mass(double lo, double hi) const {
        if (!(hi > lo)) return 0.0;
        return mass * (cdf(hi) - cdf(lo));
    }
};

struct ComplexMeasure {
    int d = 1;
    std::string label;
    std::vector<AcTerm> ac;
    std::vector<Atom> atoms;
    std::optional<CantorPart> singular;

    void validate() const {
        if (d < 1 || d > kMaxDim) throw DomainError("measure: dimension out of range");
        for (const auto& t : ac) {
            if (t.center.dim() != d) throw DomainError("measure: AC center has wrong dimension");
            if (!(t.support_radius > 0.0) || !std::isfinite(t.support_radius))
                throw DomainError("measure: support_radius must be positive and finite");
            if (t.expr.coordinates_used() > d)
                throw DomainError("measure: density uses y" + std::to_string(t.expr.coordinates_used()) +
                                  " in dimension " + std::to_string(d));
            for (const auto& p : t.removable)
                if (p.dim() != d) throw DomainError("measure: removable point has wrong dimension");
        }
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (atoms[i].point.dim() != d) throw DomainError("measure: atom has wrong dimension");
            for (std::size_t j = 0; j < i; ++j)
                if (atoms[i].point == atoms[j].point) throw DomainError("measure: atoms must be at distinct points");
        }
        if (singular) {
            if (d != 1) throw DomainError("measure: singular part requires d = 1");
            if (!(singular->b > singular->a)) throw DomainError("measure: singular interval must have a < b");
        }
    }

    /// Largest distance from p to a point of the support.
    [[nodiscard]] double extent_from(const Vec& p) const {
        double e = 0.0;
        for (const auto& t : ac) e = std::max(e, dist(t.center, p) + t.support_radius);
        for (const auto& a : atoms) e = std::max(e, dist(a.point, p));
        if (singular) e = std::max({e, std::abs(singular->a - p[0]), std::abs(singular->b - p[0])});
        return e;
    }
};

// ---------------------------------------------------------------------------
// Construction helpers
// ---------------------------------------------------------------------------

[[nodiscard]] inline AcTerm make_ac_term(const std::string& expr, Vec center, double support_radius,
                                         Complex coeff = 1.0, std::vector<Vec> removable = {}) {
    AcTerm t;
    t.coeff = coeff;
    t.expr = parse_density(expr);
    t.center = std::move(center);
    t.support_radius = support_radius;
    t.removable = std::move(removable);
    return t;
}

/// a*nu1 + b*nu2 by concatenating components; atoms at equal points merge.
[[nodiscard]] inline ComplexMeasure combine(Complex a, const ComplexMeasure& m1, Complex b, const ComplexMeasure& m2) {
    if (m1.d != m2.d) throw DomainError("combine: dimension mismatch");
    ComplexMeasure out;
    out.d = m1.d;
    out.label = m1.label + "+" + m2.label;
    for (auto t : m1.ac) {
        t.coeff *= a;
        out.ac.push_back(std::move(t));
    }
    for (auto t : m2.ac) {
        t.coeff *= b;
        out.ac.push_back(std::move(t));
    }
    auto add_atom = [&](const Atom& at, Complex s) {
        for (auto& e : out.atoms)
            if (e.point == at.point) {
                e.weight += s * at.weight;
                return;
            }
        out.atoms.push_back({at.point, s * at.weight});
    };
    for (const auto& at : m1.atoms) add_atom(at, a);
    for (const auto& at : m2.atoms) add_atom(at, b);
    if (m1.singular && m2.singular) {
        if (m1.singular->a != m2.singular->a || m1.singular->b != m2.singular->b)
            throw DomainError("combine: Cantor parts on different intervals");
        out.singular = CantorPart{m1.singular->a, m1.singular->b, a * m1.singular->mass + b * m2.singular->mass};
    } else if (m1.singular) {
        out.singular = CantorPart{m1.singular->a, m1.singular->b, a * m1.singular->mass};
    } else if (m2.singular) {
        out.singular = CantorPart{m2.singular->a, m2.singular->b, b * m2.singular->mass};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cantor integration
// ---------------------------------------------------------------------------

/// Int g d(lambda) for the Cantor part. Each construction interval of
/// length L and mass m carries the two-point rule m (g(c - h) + g(c + h))/2,
/// h = L/(2 sqrt 2), which matches the measure's moments up to degree 3.
/// Intervals are refined where the rule disagrees with its children.
template <class G>
CubatureResult<Complex> cantor_integrate(const CantorPart& cp, G&& g, const CubatureOptions& opt) {
    using T = Complex;
    struct Node {
        double a, len, mass;
        T coarse, fine;
        double err;
        int depth;
    };
    const double h = 1.0 / (2.0 * std::numbers::sqrt2);
    std::size_t evals = 0;
    auto two_point = [&](double a, double len, double mass) -> T {
        const double c = a + 0.5 * len;
        evals += 2;
        return (T(g(c - h * len)) + T(g(c + h * len))) * (0.5 * mass);
    };
    auto make = [&](double a, double len, double mass, T coarse, int depth) {
        const double cl = len / 3.0;
        const T fine = two_point(a, cl, 0.5 * mass) + two_point(a + len - cl, cl, 0.5 * mass);
        return Node{a, len, mass, coarse, fine, std::abs(fine - coarse), depth};
    };
    auto cmp = [](const Node& l, const Node& r) { return l.err < r.err; };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> heap(cmp);
    std::vector<Node> done;
    heap.push(make(cp.a, cp.b - cp.a, 1.0, two_point(cp.a, cp.b - cp.a, 1.0), 0));
    T total = heap.top().fine;
    double total_err = heap.top().err;
    CubatureResult<Complex> out;
    std::size_t nodes = 1;
    while (!heap.empty()) {
        const double target = std::max(opt.abs_tol / std::max(std::abs(cp.mass), 1e-300), opt.rel_tol * std::abs(total));
        if (total_err <= target) break;
        if (nodes >= opt.max_intervals) {
            out.converged = false;
            break;
        }
        Node n = heap.top();
        heap.pop();
        if (n.depth >= 45) {
            done.push_back(n);
            continue;
        }
        const double cl = n.len / 3.0;
        const T lc = two_point(n.a, cl, 0.5 * n.mass);
        const T rc = two_point(n.a + n.len - cl, cl, 0.5 * n.mass);
        Node l = make(n.a, cl, 0.5 * n.mass, lc, n.depth + 1);
        Node r = make(n.a + n.len - cl, cl, 0.5 * n.mass, rc, n.depth + 1);
        total += l.fine + r.fine - n.fine;
        total_err += l.err + r.err - n.err;
        heap.push(l);
        heap.push(r);
        ++nodes;
    }
    std::vector<Node> all = std::move(done);
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Node& l, const Node& r) { return l.a < r.a; });
    T sum{};
    double err = 0.0;
    for (const auto& n : all) {
        sum += n.fine;
        err += n.err;
    }
    out.value = sum * cp.mass;
    out.error = err * std::abs(cp.mass);
    out.evaluations = evals;
    return out;
}

// ---------------------------------------------------------------------------
// Ball masses
// ---------------------------------------------------------------------------

namespace detail {

/// Removable point of a d = 1 term inside [lo, hi] (NaN when there is none).
inline double line_pivot(const AcTerm& t, double lo, double hi) {
    for (const auto& p : t.removable)
        if (p[0] >= lo && p[0] <= hi) return p[0];
    return std::numeric_limits<double>::quiet_NaN();
}

inline std::vector<double> line_breaks(const AcTerm& t) {
    std::vector<double> br;
    for (double th : t.expr.radial_thresholds()) {
        br.push_back(t.center[0] - th);
        br.push_back(t.center[0] + th);
    }
    for (const auto& b : t.jumps) {
        br.push_back(b.center[0] - b.radius);
        br.push_back(b.center[0] + b.radius);
    }
    return br;
}

inline CubatureResult<double> term_ball_integral(const AcTerm& t, const Vec& x, double r, const CubatureOptions& opt) {
    const int d = x.dim();
    if (t.radial()) {
        const double D = dist(x, t.center);
        // |D - r| at rounding level of D means the sphere passes through the
        // center; snap it so a singular center is treated as an endpoint.
        double gap = std::abs(D - r);
        if (gap <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(D, r)) gap = 0.0;
        const double lo = D > r ? gap : 0.0;
        const double hi = std::min(t.support_radius, D + r);
        std::vector<double> br = t.thresholds();
        br.push_back(gap);
        br.push_back(D + r);
        auto f = [&](double rho) {
            const double cap = ball_cap_area(d, D, rho, r);
            if (cap == 0.0) return 0.0;
            return t.radial_density(rho) * std::pow(rho, d - 1) * cap;
        };
        return integrate_interval(f, lo, hi, br, lo == 0.0 && t.singular_at(t.center), opt);
    }
    if (d == 1) {
        const double lo = std::max(x[0] - r, t.center[0] - t.support_radius);
        const double hi = std::min(x[0] + r, t.center[0] + t.support_radius);
        return line_integral([&](double y) { return t.density(Vec{y}); }, lo, hi, line_pivot(t, lo, hi),
                             line_breaks(t), opt);
    }
    PolarSetup s;
    s.frame = x;
    s.singular_at_frame = t.singular_at(s.frame);
    s.axis = t.center - s.frame;
    s.domain = {{x, r}, {t.center, t.support_radius}};
    for (double th : t.expr.radial_thresholds()) s.jumps.push_back({t.center, th});
    s.jumps.insert(s.jumps.end(), t.jumps.begin(), t.jumps.end());
    return polar_cubature(s, [&](const Vec& y) { return t.density(y); }, opt);
}

}  // namespace detail

/// nu(B_r(x)), open ball by default; `closed` adds atoms on the boundary
/// sphere. AC and Cantor parts do not see the boundary.
[[nodiscard]] inline Complex ball_mass(const ComplexMeasure& nu, const Vec& x, double r, bool closed = false,
                                       const CubatureOptions& opt = {}) {
    if (!(r >= 0.0)) throw DomainError("ball_mass: r must be nonnegative");
    Complex total = 0.0;
    if (r > 0.0)
        for (const auto& t : nu.ac) {
            const auto res = detail::term_ball_integral(t, x, r, opt);
            if (!res.converged)
                throw CubatureError("ball_mass: cubature did not converge (error estimate " +
                                    format_double(res.error) + ")");
            total += t.coeff * res.value;
        }
    for (const auto& a : nu.atoms) {
        const double dd = dist(a.point, x);
        if (dd < r || (closed && dd <= r)) total += a.weight;
    }
    if (nu.singular && r > 0.0) total += nu.singular->interval_mass(x[0] - r, x[0] + r);
    return total;
}

// ---------------------------------------------------------------------------
// Total variation and subtraction of a multiple of Lebesgue measure
// ---------------------------------------------------------------------------

namespace detail {

/// Rewrites e (in coordinates relative to `from`) in coordinates relative to
/// `to`: y -> y + (to - from).
inline NodePtr shift_tree(const NodePtr& n, const Vec& delta) {
    auto num = [](double v) {
        auto m = std::make_shared<Node>();
        m->op = Op::number;
        m->value = v;
        return NodePtr(m);
    };
    auto bin = [](Op op, NodePtr l, NodePtr r) {
        auto m = std::make_shared<Node>();
        m->op = op;
        m->lhs = std::move(l);
        m->rhs = std::move(r);
        return NodePtr(m);
    };
    auto coord = [&](int i) {
        auto m = std::make_shared<Node>();
        m->op = Op::var_y;
        m->index = i;
        return delta[i] == 0.0 ? NodePtr(m) : bin(Op::add, NodePtr(m), num(delta[i]));
    };
    if (n->op == Op::var_y) return coord(n->index);
    if (n->op == Op::var_r) {
        NodePtr sum;
        for (int i = 0; i < delta.dim(); ++i) {
            NodePtr sq = bin(Op::pow, coord(i), num(2.0));
            sum = sum ? bin(Op::add, sum, sq) : sq;
        }
        auto s = std::make_shared<Node>();
        s->op = Op::f_sqrt;
        s->lhs = sum;
        return s;
    }
    if (!n->lhs) return n;
    auto m = std::make_shared<Node>(*n);
    m->lhs = shift_tree(n->lhs, delta);
    if (n->rhs) m->rhs = shift_tree(n->rhs, delta);
    return m;
}

inline DensityExpr times(double c, const DensityExpr& e) { return DensityExpr::constant(c) * e; }

}  // namespace detail

/// |nu|: AC terms combined into the density |sum_k c_k f_k 1{B_k}|, atom
/// weights and the Cantor mass replaced by their moduli.
[[nodiscard]] inline ComplexMeasure total_variation(const ComplexMeasure& nu) {
    ComplexMeasure out;
    out.d = nu.d;
    out.label = "|" + nu.label + "|";
    if (!nu.ac.empty()) {
        const Vec c0 = nu.ac.front().center;
        std::optional<DensityExpr> re, im;
        AcTerm t;
        t.center = c0;
        t.support_radius = 0.0;
        for (const auto& term : nu.ac) {
            // Term coordinates are y - c_k = (y - c0) + (c0 - c_k).
            const Vec delta = c0 - term.center;
            const bool shifted = norm2(delta) > 0.0;
            DensityExpr f = shifted ? DensityExpr(detail::shift_tree(term.expr.root(), delta)) : term.expr;
            DensityExpr rad = shifted ? DensityExpr(detail::shift_tree(DensityExpr::radius().root(), delta))
                                      : DensityExpr::radius();
            const DensityExpr ind =
                DensityExpr::binary(Op::ind_lt, rad, DensityExpr::constant(term.support_radius));
            const DensityExpr piece = f * ind;
            if (term.coeff.real() != 0.0) {
                const DensityExpr p = detail::times(term.coeff.real(), piece);
                re = re ? *re + p : p;
            }
            if (term.coeff.imag() != 0.0) {
                const DensityExpr p = detail::times(term.coeff.imag(), piece);
                im = im ? *im + p : p;
            }
            t.support_radius = std::max(t.support_radius, norm(delta) + term.support_radius);
            t.removable.insert(t.removable.end(), term.removable.begin(), term.removable.end());
            t.jumps.insert(t.jumps.end(), term.jumps.begin(), term.jumps.end());
            if (shifted) {
                // Thresholds about another center are invisible to radial_thresholds.
                t.jumps.push_back({term.center, term.support_radius});
                for (double th : term.expr.radial_thresholds()) t.jumps.push_back({term.center, th});
            }
        }
        if (!re && !im) re = DensityExpr::constant(0.0);
        if (re && im) {
            const auto two = DensityExpr::constant(2.0);
            t.expr = DensityExpr::unary(Op::f_sqrt, DensityExpr::binary(Op::pow, *re, two) +
                                                        DensityExpr::binary(Op::pow, *im, two));
        } else {
            t.expr = DensityExpr::unary(Op::f_abs, re ? *re : *im);
        }
        out.ac.push_back(std::move(t));
    }
    for (const auto& a : nu.atoms) out.atoms.push_back({a.point, std::abs(a.weight)});
    if (nu.singular) out.singular = CantorPart{nu.singular->a, nu.singular->b, std::abs(nu.singular->mass)};
    return out;
}

/// Default working ball for subtracting ell dy near x0: centered at x0,
/// radius max(extent + 4, |x0| + 6) where extent is the support's reach
/// from x0.
[[nodiscard]] inline Ball working_ball(const ComplexMeasure& nu, const Vec& x0) {
    return {x0, std::max(nu.extent_from(x0) + 4.0, norm(x0) + 6.0)};
}

/// nu - ell dy, with dy restricted to the ball `work`. ell = 0 returns nu.
[[nodiscard]] inline ComplexMeasure subtract_lebesgue(const ComplexMeasure& nu, Complex ell, const Ball& work) {
    ComplexMeasure out = nu;
    out.label = nu.label + "-ell";
    if (ell == Complex(0.0)) return out;
    AcTerm t;
    t.coeff = -ell;
    t.expr = DensityExpr::constant(1.0);
    t.center = work.center;
    t.support_radius = work.radius;
    out.ac.push_back(std::move(t));
    return out;
}

[[nodiscard]] inline ComplexMeasure subtract_lebesgue(const ComplexMeasure& nu, Complex ell) {
    return subtract_lebesgue(nu, ell, working_ball(nu, Vec::zero(nu.d)));
}

// ---------------------------------------------------------------------------
// Integrals
// ---------------------------------------------------------------------------

/// Int g dnu for a general integrand g(y) (double or Complex).
template <class G>
[[nodiscard]] Complex integrate(G&& g, const ComplexMeasure& nu, const CubatureOptions& opt = {}) {
    Complex total = 0.0;
    for (const auto& t : nu.ac) {
        if (nu.d == 1) {
            const double lo = t.center[0] - t.support_radius, hi = t.center[0] + t.support_radius;
            const auto res = line_integral([&](double y) { return Complex(t.density(Vec{y})) * Complex(g(Vec{y})); },
                                           lo, hi, detail::line_pivot(t, lo, hi), detail::line_breaks(t), opt);
            if (!res.converged)
                throw CubatureError("integrate: quadrature did not converge (error estimate " +
                                    format_double(res.error) + ")");
            total += t.coeff * res.value;
            continue;
        }
        PolarSetup s;
        s.frame = t.center;
        s.axis = Vec::unit(nu.d, 0);
        s.singular_at_frame = t.singular_at(t.center);
        s.domain = {{t.center, t.support_radius}};
        for (double th : t.expr.radial_thresholds()) s.jumps.push_back({t.center, th});
        s.jumps.insert(s.jumps.end(), t.jumps.begin(), t.jumps.end());
        const auto res = polar_cubature(s, [&](const Vec& y) { return Complex(t.density(y)) * Complex(g(y)); }, opt);
        if (!res.converged)
            throw CubatureError("integrate: cubature did not converge (error estimate " + format_double(res.error) + ")");
        total += t.coeff * res.value;
    }
    for (const auto& a : nu.atoms) {
        const Complex v = g(a.point);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw CubatureError("integrate: integrand is not finite at an atom");
        total += a.weight * v;
    }
    if (nu.singular) {
        const auto res = cantor_integrate(*nu.singular, [&](double y) { return Complex(g(Vec{y})); }, opt);
        if (!res.converged) throw CubatureError("integrate: Cantor refinement did not converge");
        total += res.value;
    }
    return total;
}

/// Int g0(|y - p|) dnu(y), using the one-dimensional reduction for AC terms
/// that are radial about p.
template <class G0>
[[nodiscard]] Complex integrate_radial(G0&& g0, const Vec& p, const ComplexMeasure& nu, const CubatureOptions& opt = {}) {
    Complex total = 0.0;
    ComplexMeasure rest = nu;
    rest.ac.clear();
    for (const auto& t : nu.ac) {
        if (!(t.radial() && t.center == p)) {
            rest.ac.push_back(t);
            continue;
        }
        const double area = sphere_area(nu.d - 1);
        auto f = [&](double rho) { return t.radial_density(rho) * g0(rho) * std::pow(rho, nu.d - 1) * area; };
        const auto res = integrate_interval(f, 0.0, t.support_radius, t.thresholds(), t.singular_at(p), opt);
        if (!res.converged) throw CubatureError("integrate_radial: did not converge");
        total += t.coeff * res.value;
    }
    total += integrate([&](const Vec& y) { return g0(dist(y, p)); }, rest, opt);
    return total;
}

/// Int Phi d|nu|.
[[nodiscard]] inline double phi_norm(const ComplexMeasure& nu, const CubatureOptions& opt = {}) {
    const ComplexMeasure tv = total_variation(nu);
    const int d = nu.d;
    return integrate_radial([d](double r) { return phi_radial(d, r); }, Vec::zero(d), tv, opt).real();
}

// ---------------------------------------------------------------------------
// Polar coordinates: rho(r) = nu(closed ball B_r(x)) and Stieltjes integrals
// ---------------------------------------------------------------------------

struct StieltjesMeasure {
    /// rho(r) = nu(closed ball of radius r about the center).
    std::function<Complex(double)> cdf;
    /// Left limits rho(r-) = nu(open ball).
    std::function<Complex(double)> cdf_open;
    /// Radii where rho may jump (atoms).
    std::vector<double> jump_hints;
    /// Radii where the continuous part changes character.
    std::vector<double> grid_hints;
    /// rho is constant beyond this radius.
    double r_max = 0.0;
    /// Mass of the singular continuous part (a devil's staircase) in the
    /// closed ball of radius r; empty when there is none. Local polynomial
    /// fits say little about the rule's error on that part.
    std::function<Complex(double)> singular_cdf;
};

[[nodiscard]] inline StieltjesMeasure polar_cdf(const ComplexMeasure& nu, const Vec& x, const CubatureOptions& opt = {}) {
    StieltjesMeasure s;
    auto shared = std::make_shared<ComplexMeasure>(nu);
    s.cdf = [shared, x, opt](double r) { return ball_mass(*shared, x, r, true, opt); };
    s.cdf_open = [shared, x, opt](double r) { return ball_mass(*shared, x, r, false, opt); };
    for (const auto& a : nu.atoms) s.jump_hints.push_back(dist(a.point, x));
    for (const auto& t : nu.ac) {
        const double D = dist(t.center, x);
        for (double th : t.thresholds()) {
            s.grid_hints.push_back(std::abs(D - th));
            s.grid_hints.push_back(D + th);
        }
        s.grid_hints.push_back(D);
    }
    if (nu.singular) {
        const CantorPart sp = *nu.singular;
        const double c = x[0];
        s.singular_cdf = [sp, c](double r) { return r > 0.0 ? sp.interval_mass(c - r, c + r) : Complex(0.0); };
        s.grid_hints.push_back(std::abs(nu.singular->a - x[0]));
        s.grid_hints.push_back(std::abs(nu.singular->b - x[0]));
    }
    s.r_max = nu.extent_from(x) * (1.0 + 1e-12) + 1e-300;
    std::sort(s.jump_hints.begin(), s.jump_hints.end());
    s.jump_hints.erase(std::unique(s.jump_hints.begin(), s.jump_hints.end()), s.jump_hints.end());
    return s;
}

/// Int_{[0,inf)} f0 dm_rho: jumps at the hinted radii (including r = 0)
/// summed exactly; the continuous part by an adaptive Stieltjes rule that
/// fits a quadratic to rho at the ends and midpoint of each interval and
/// integrates f0 against its derivative, refining until the estimate on an
/// interval agrees with the sum over its halves.
template <class F0>
[[nodiscard]] Complex polar_integrate(F0&& f0, const StieltjesMeasure& S, const CubatureOptions& opt = {}) {
    Complex total = S.cdf(0.0) * f0(0.0);
    std::vector<std::pair<double, Complex>> jumps;
    for (double r : S.jump_hints) {
        if (r == 0.0) continue;
        const Complex j = S.cdf(r) - S.cdf_open(r);
        if (j != Complex(0.0)) {
            jumps.emplace_back(r, j);
            total += j * f0(r);
        }
    }
    const Complex base = S.cdf(0.0);
    auto cont = [&](double r) {
        Complex v = S.cdf(r) - base;
        for (const auto& [rj, j] : jumps)
            if (rj <= r) v -= j;
        return v;
    };

    const auto& gl = quad::gauss_legendre(6);
    struct Seg {
        double a, b;
        Complex ra, rm, rb;
        Complex est;
        double err;
    };
    // Rule on [a,b] from rho at a, (a+b)/2, b: the quadratic through those
    // values has derivative linear in r; integrate f0 times it by Gauss.
    auto rule = [&](double a, double b, Complex ra, Complex rm, Complex rb) {
        const double h = b - a;
        Complex s = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double u = 0.5 * (gl.nodes[i] + 1.0);  // position in [0,1]
            const Complex dq = ((4.0 * u - 3.0) * ra + (4.0 - 8.0 * u) * rm + (4.0 * u - 1.0) * rb) / h;
            s += 0.5 * h * gl.weights[i] * f0(a + u * h) * dq;
        }
        return s;
    };
    auto make = [&](double a, double b, Complex ra, Complex rm, Complex rb) {
        const double m = 0.5 * (a + b);
        const Complex rq1 = cont(0.5 * (a + m));
        const Complex rq3 = cont(0.5 * (m + b));
        const Complex whole = rule(a, b, ra, rm, rb);
        const Complex halves = rule(a, m, ra, rq1, rm) + rule(m, b, rm, rq3, rb);
        double e = std::abs(halves - whole);
        if (S.singular_cdf) {
            // Any rule that preserves the singular mass of [a,b] errs on it
            // by at most the oscillation of f0 times that mass.
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (double r : {a, 0.5 * (a + m), m, 0.5 * (m + b), b}) {
                const double v = std::abs(f0(r));
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            e = std::max(e, (hi - lo) * std::abs(S.singular_cdf(b) - S.singular_cdf(a)));
        }
        return std::pair<Seg, std::pair<Complex, Complex>>{Seg{a, b, ra, rm, rb, halves, e}, {rq1, rq3}};
    };

    std::vector<double> pts{0.0, S.r_max};
    for (double r : S.grid_hints)
        if (r > 0.0 && r < S.r_max) pts.push_back(r);
    for (const auto& [r, j] : jumps)
        if (r < S.r_max) pts.push_back(r);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    // Start from a uniform refinement so small features are not missed.
    std::vector<double> init;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        for (int k = 0; k < 16; ++k) init.push_back(pts[i] + (pts[i + 1] - pts[i]) * k / 16.0);
    init.push_back(pts.back());

    // Evaluate the continuous part just inside each jump on the right, so a
    // jump at b is never attributed to [a, b].
    auto cmp = [](const Seg& l, const Seg& r) { return l.err < r.err; };
    std::priority_queue<Seg, std::vector<Seg>, decltype(cmp)> heap(cmp);
    std::vector<Complex> vals(init.size());
    for (std::size_t i = 0; i < init.size(); ++i) vals[i] = cont(init[i]);
    Complex sum = 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < init.size(); ++i) {
        const double a = init[i], b = init[i + 1];
        const Complex rb = cont(std::nextafter(b, a));
        auto [seg, q] = make(a, b, vals[i], cont(0.5 * (a + b)), rb);
        sum += seg.est;
        err += seg.err;
        heap.push(seg);
    }
    std::size_t count = heap.size();
    while (!heap.empty() && err > std::max(opt.abs_tol, opt.rel_tol * std::abs(sum))) {
        if (count >= opt.max_intervals * 10) throw CubatureError("polar_integrate: refinement did not converge");
        Seg s = heap.top();
        heap.pop();
        const double m = 0.5 * (s.a + s.b);
        if (!(m > s.a && m < s.b)) continue;
        auto [l, ql] = make(s.a, m, s.ra, cont(0.5 * (s.a + m)), s.rm);
        auto [r, qr] = make(m, s.b, s.rm, cont(0.5 * (m + s.b)), s.rb);
        sum += l.est + r.est - s.est;
        err += l.err + r.err - s.err;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // Re-sum in position order for reproducibility.
    std::vector<Seg> all;
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Seg& l, const Seg& r) { return l.a < r.a; });
    Complex cont_total = 0.0;
    for (const auto& s : all) cont_total += s.est;
    return total + cont_total;
}

template <class F0>
[[nodiscard]] Complex polar_integrate(F0&& f0, const ComplexMeasure& nu, const Vec& x, const CubatureOptions& opt = {}) {
    return polar_integrate(std::forward<F0>(f0), polar_cdf(nu, x, opt), opt);
}

}  // namespace hpl
