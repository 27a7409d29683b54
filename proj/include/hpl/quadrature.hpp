#pragma once

// One-dimensional quadrature: globally adaptive Gauss-Kronrod (7/15) in the
// QUADPACK style, cached Gauss-Legendre rules, and piecewise Chebyshev
// interpolation for functions that are sampled many times.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <type_traits>
#include <vector>

#include "hpl/core.hpp"

namespace hpl::quad {

struct Options {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::size_t max_intervals = 2000;
};

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    std::size_t evaluations = 0;
    std::size_t intervals = 0;
    bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
    double a, b;
    T value;
    double error;
};

template <class T>
double magnitude(const T& v) {
    return std::abs(v);
}

/// 15-point Kronrod estimate on [a,b] with the QUADPACK error heuristic.
template <class T, class F>
Panel<T> kronrod15(F& f, double a, double b) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<T, 15> fv;
    fv[7] = f(center);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[static_cast<std::size_t>(j)];
        fv[static_cast<std::size_t>(j)] = f(center - dx);
        fv[static_cast<std::size_t>(14 - j)] = f(center + dx);
    }
    T resk = fv[7] * kWgk[7];
    T resg = fv[7] * kWg[3];
    double resabs = magnitude(fv[7]) * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        const T pair = fv[jj] + fv[14 - jj];
        resk += pair * kWgk[jj];
        resabs += (magnitude(fv[jj]) + magnitude(fv[14 - jj])) * kWgk[jj];
        if (j % 2 == 1) resg += pair * kWg[jj / 2];
    }
    const T mean = resk * 0.5;
    double resasc = magnitude(fv[7] - mean) * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        resasc += (magnitude(fv[jj] - mean) + magnitude(fv[14 - jj] - mean)) * kWgk[jj];
    }
    const double ah = std::abs(half);
    resasc *= ah;
    resabs *= ah;
    double err = magnitude((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {a, b, resk * half, err};
}

}  // namespace detail

/// Globally adaptive integration of f over [breaks.front(), breaks.back()],
/// starting from the panels delimited by `breaks` (sorted, size >= 2).
/// The panel with the largest error estimate is bisected until the summed
/// estimate falls below max(abs_tol, rel_tol*|I|) or the panel budget runs
/// out; in the latter case `converged` is false and the best estimate is
/// returned.
template <class F>
auto integrate(F&& f, std::span<const double> breaks, const Options& opt)
    -> Result<std::decay_t<std::invoke_result_t<F&, double>>> {
    using T = std::decay_t<std::invoke_result_t<F&, double>>;
    using P = detail::Panel<T>;
    Result<T> out;
    if (breaks.size() < 2) return out;

    std::vector<P> heap;
    std::vector<P> frozen;
    heap.reserve(std::min<std::size_t>(opt.max_intervals + breaks.size(), 1u << 16));
    auto cmp = [](const P& l, const P& r) { return l.error < r.error; };

    T total{};
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        P p = detail::kronrod15<T>(f, breaks[i], breaks[i + 1]);
        out.evaluations += 15;
        total += p.value;
        total_err += p.error;
        heap.push_back(p);
    }
    std::make_heap(heap.begin(), heap.end(), cmp);

    auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total)); };
    std::size_t panels = heap.size();
    std::size_t since_resum = 0;
    while (!heap.empty() && total_err > tolerance()) {
        if (panels >= opt.max_intervals) {
            out.converged = false;
            break;
        }
        std::pop_heap(heap.begin(), heap.end(), cmp);
        P worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) < 64.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(std::abs(worst.a), std::abs(worst.b))) {
            frozen.push_back(worst);
            continue;
        }
        P left = detail::kronrod15<T>(f, worst.a, mid);
        P right = detail::kronrod15<T>(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), cmp);
        ++panels;
        if (++since_resum == 256) {
            since_resum = 0;
            total = T{};
            total_err = 0.0;
            for (const auto& p : heap) {
                total += p.value;
                total_err += p.error;
            }
            for (const auto& p : frozen) {
                total += p.value;
                total_err += p.error;
            }
        }
    }
    if (heap.empty() && total_err > tolerance()) out.converged = false;

    out.value = T{};
    out.error = 0.0;
    // Sum in a fixed order so results do not depend on heap layout history.
    std::vector<P> all;
    all.reserve(heap.size() + frozen.size());
    all.insert(all.end(), heap.begin(), heap.end());
    all.insert(all.end(), frozen.begin(), frozen.end());
    std::sort(all.begin(), all.end(), [](const P& l, const P& r) { return l.a < r.a; });
    for (const auto& p : all) {
        out.value += p.value;
        out.error += p.error;
    }
    out.intervals = all.size();
    if (out.error > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(out.value))) out.converged = false;
    return out;
}

template <class F>
auto integrate(F&& f, double a, double b, const Options& opt) {
    const std::array<double, 2> br{a, b};
    return integrate(std::forward<F>(f), std::span<const double>(br), opt);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules on [-1, 1]
// ---------------------------------------------------------------------------

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

[[nodiscard]] inline Rule make_gauss_legendre(int n) {
    Rule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        r.nodes[lo] = -x;
        r.nodes[hi] = x;
        r.weights[lo] = w;
        r.weights[hi] = w;
    }
    if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return r;
}

/// Cached Gauss-Legendre rule with n nodes; safe to call concurrently.
[[nodiscard]] inline const Rule& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Rule>(make_gauss_legendre(n));
    return *slot;
}

// ---------------------------------------------------------------------------
// Piecewise Chebyshev interpolation
// ---------------------------------------------------------------------------

/// Piecewise polynomial interpolant built from Chebyshev points of the
/// second kind on each panel, evaluated by the barycentric formula.
/// Panels are bisected until the trailing Chebyshev coefficients are below
/// max(rel_tol times the panel's peak magnitude, abs_floor).
class ChebyshevProfile {
public:
    static constexpr int kOrder = 16;

    template <class F>
    static ChebyshevProfile build(F&& f, std::span<const double> breaks, double rel_tol,
                                  std::size_t max_panels = 4000, double abs_floor = 0.0) {
        ChebyshevProfile prof;
        std::vector<std::pair<double, double>> todo;
        for (std::size_t i = breaks.size(); i-- > 1;)
            if (breaks[i] > breaks[i - 1]) todo.emplace_back(breaks[i - 1], breaks[i]);
        std::vector<PanelData> done;
        while (!todo.empty()) {
            auto [a, b] = todo.back();
            todo.pop_back();
            PanelData p = sample(f, a, b);
            prof.evaluations_ += kOrder + 1;
            const bool budget_left = done.size() + todo.size() < max_panels;
            if (budget_left && !p.resolved(rel_tol, abs_floor) && (b - a) > 1e-14 * std::max(1.0, std::abs(a))) {
                const double m = 0.5 * (a + b);
                todo.emplace_back(m, b);
                todo.emplace_back(a, m);
                continue;
            }
            done.push_back(std::move(p));
        }
        std::sort(done.begin(), done.end(), [](const PanelData& l, const PanelData& r) { return l.a < r.a; });
        prof.panels_ = std::move(done);
        return prof;
    }

    [[nodiscard]] double operator()(double x) const {
        if (panels_.empty()) return 0.0;
        auto it = std::upper_bound(panels_.begin(), panels_.end(), x,
                                   [](double v, const PanelData& p) { return v < p.a; });
        if (it != panels_.begin()) --it;
        return it->eval(x);
    }

    [[nodiscard]] std::size_t panels() const noexcept { return panels_.size(); }
    [[nodiscard]] std::size_t evaluations() const noexcept { return evaluations_; }
    [[nodiscard]] double lo() const { return panels_.empty() ? 0.0 : panels_.front().a; }
    [[nodiscard]] double hi() const { return panels_.empty() ? 0.0 : panels_.back().b; }

private:
    struct PanelData {
        double a = 0.0, b = 0.0;
        std::array<double, kOrder + 1> values{};
        double peak = 0.0;
        double tail = 0.0;

        [[nodiscard]] bool resolved(double rel_tol, double abs_floor) const { return tail <= std::max(rel_tol * peak, abs_floor); }

        [[nodiscard]] double eval(double x) const {
            const double s = (2.0 * x - (a + b)) / (b - a);
            double num = 0.0, den = 0.0;
            for (int j = 0; j <= kOrder; ++j) {
                const double xj = node(j);
                const double diff = s - xj;
                if (diff == 0.0) return values[static_cast<std::size_t>(j)];
                double w = (j % 2 == 0) ? 1.0 : -1.0;
                if (j == 0 || j == kOrder) w *= 0.5;
                const double q = w / diff;
                num += q * values[static_cast<std::size_t>(j)];
                den += q;
            }
            return num / den;
        }
    };

    static double node(int j) { return std::cos(std::numbers::pi * j / kOrder); }

    template <class F>
    static PanelData sample(F& f, double a, double b) {
        PanelData p;
        p.a = a;
        p.b = b;
        for (int j = 0; j <= kOrder; ++j) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * node(j);
            const double v = f(x);
            p.values[static_cast<std::size_t>(j)] = v;
            p.peak = std::max(p.peak, std::abs(v));
        }
        // Chebyshev coefficients by direct cosine transform (order is small).
        std::array<double, kOrder + 1> c{};
        for (int k = 0; k <= kOrder; ++k) {
            double s = 0.0;
            for (int j = 0; j <= kOrder; ++j) {
                double w = (j == 0 || j == kOrder) ? 0.5 : 1.0;
                s += w * p.values[static_cast<std::size_t>(j)] * std::cos(std::numbers::pi * j * k / kOrder);
            }
            c[static_cast<std::size_t>(k)] = s * 2.0 / kOrder;
        }
        p.tail = std::abs(c[kOrder]) + std::abs(c[kOrder - 1]) + std::abs(c[kOrder - 2]);
        return p;
    }

    std::vector<PanelData> panels_;
    std::size_t evaluations_ = 0;
};

}  // namespace hpl::quad
