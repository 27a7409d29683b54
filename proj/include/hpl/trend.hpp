#pragma once

// Dyadic trend heuristics shared by point classification and cone scans.
// No finite table decides a limit; these rules are the documented proxy.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace hpl {

struct TrendThresholds {
    /// last / first must fall below this for a decreasing trend.
    double ratio = 0.1;
    /// The final value must fall below this.
    double final_value = 1e-2;
    /// Values below this count as numerically zero.
    double zero = 1e-12;
};

struct Trend {
    double first = 0.0;
    double last = 0.0;
    double ratio = 0.0;
    /// Least-squares slope of log(value) against log(scale) over positive entries.
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool converges = false;
    bool diverges = false;

    [[nodiscard]] std::string verdict() const { return converges ? "converges" : (diverges ? "diverges" : "inconclusive"); }
};

[[nodiscard]] inline double fit_log_slope(const std::vector<double>& scale, const std::vector<double>& value) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < scale.size() && i < value.size(); ++i) {
        if (!(value[i] > 0.0) || !(scale[i] > 0.0) || !std::isfinite(value[i])) continue;
        const double x = std::log(scale[i]), y = std::log(value[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

/// Trend of a nonnegative sequence listed from the coarsest scale to the
/// finest. Converges: final below threshold and either numerically zero or
/// last/first below the ratio threshold. Diverges: last/first above 1/ratio.
[[nodiscard]] inline Trend analyze_trend(const std::vector<double>& scale, const std::vector<double>& value,
                                         const TrendThresholds& th = {}) {
    Trend tr;
    if (value.empty()) return tr;
    tr.first = value.front();
    tr.last = value.back();
    tr.slope = fit_log_slope(scale, value);
    if (tr.first > 0.0) tr.ratio = tr.last / tr.first;
    else tr.ratio = tr.last > th.zero ? std::numeric_limits<double>::infinity() : 0.0;
    const bool small = tr.last < th.final_value;
    tr.converges = std::isfinite(tr.last) && small && (tr.last <= th.zero || tr.ratio < th.ratio);
    tr.diverges = !std::isfinite(tr.last) || (!tr.converges && tr.ratio > 1.0 / th.ratio);
    return tr;
}

}  // namespace hpl
