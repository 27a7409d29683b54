#pragma once

// Shared vocabulary for the hpl library: points in R^d, error types,
// geometric constants, a portable seeded RNG and number formatting.

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

namespace hpl {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 10;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature could not reach its tolerance inside the node budget.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved_error)
        : Error(what + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
          achieved_error_(achieved_error) {}
    [[nodiscard]] double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

class CubatureError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Vec: a point or displacement in R^d, d <= kMaxDim, stored inline.
// ---------------------------------------------------------------------------

class Vec {
public:
    Vec() = default;
    explicit Vec(int dim) : dim_(check_dim(dim)) {}
    Vec(std::initializer_list<double> values) : dim_(check_dim(static_cast<int>(values.size()))) {
        std::copy(values.begin(), values.end(), v_.begin());
    }
    explicit Vec(const std::vector<double>& values)
        : dim_(check_dim(static_cast<int>(values.size()))) {
        std::copy(values.begin(), values.end(), v_.begin());
    }

    static Vec zero(int dim) { return Vec(dim); }
    static Vec unit(int dim, int axis) {
        Vec e(dim);
        e[axis] = 1.0;
        return e;
    }

    [[nodiscard]] int dim() const noexcept { return dim_; }
    double& operator[](int i) noexcept { return v_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const noexcept { return v_[static_cast<std::size_t>(i)]; }

    [[nodiscard]] const double* begin() const noexcept { return v_.data(); }
    [[nodiscard]] const double* end() const noexcept { return v_.data() + dim_; }

    [[nodiscard]] std::vector<double> to_vector() const { return {begin(), end()}; }

    Vec& operator+=(const Vec& o) noexcept {
        for (int i = 0; i < dim_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) noexcept {
        for (int i = 0; i < dim_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(double s) noexcept {
        for (int i = 0; i < dim_; ++i) v_[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) noexcept { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) noexcept { return a -= b; }
    friend Vec operator*(Vec a, double s) noexcept { return a *= s; }
    friend Vec operator*(double s, Vec a) noexcept { return a *= s; }
    friend Vec operator-(Vec a) noexcept { return a *= -1.0; }

    friend bool operator==(const Vec& a, const Vec& b) noexcept {
        if (a.dim_ != b.dim_) return false;
        for (int i = 0; i < a.dim_; ++i)
            if (a.v_[i] != b.v_[i]) return false;
        return true;
    }

private:
    static int check_dim(int dim) {
        if (dim < 1 || dim > kMaxDim)
            throw DomainError("dimension must lie in [1, " + std::to_string(kMaxDim) + "], got " +
                              std::to_string(dim));
        return dim;
    }

    std::array<double, kMaxDim> v_{};
    int dim_ = 0;
};

[[nodiscard]] inline double dot(const Vec& a, const Vec& b) noexcept {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

[[nodiscard]] inline double norm2(const Vec& a) noexcept { return dot(a, a); }
[[nodiscard]] inline double norm(const Vec& a) noexcept { return std::sqrt(norm2(a)); }

[[nodiscard]] inline double dist2(const Vec& a, const Vec& b) noexcept {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

[[nodiscard]] inline double dist(const Vec& a, const Vec& b) noexcept { return std::sqrt(dist2(a, b)); }

// ---------------------------------------------------------------------------
// Geometry of balls and spheres
// ---------------------------------------------------------------------------

/// Surface area of the unit sphere S^{k} embedded in R^{k+1}.
[[nodiscard]] inline double sphere_area(int k) {
    const double n = k + 1;
    return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

/// Volume of the unit ball in R^d.
[[nodiscard]] inline double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

[[nodiscard]] inline double ball_volume(int d, double r) { return unit_ball_volume(d) * std::pow(r, d); }

// ---------------------------------------------------------------------------
// Seeded random numbers. mt19937_64 output is fully specified by the
// standard; the conversions below avoid implementation-defined distributions
// so that seeded runs are reproducible across standard libraries.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        spare_ = rad * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return rad * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vec unit_vector(int d) {
        Vec v(d);
        double n = 0.0;
        while (n < 1e-12) {
            for (int i = 0; i < d; ++i) v[i] = normal();
            n = norm(v);
        }
        return v * (1.0 / n);
    }

    /// Uniform sample from the closed ball of radius r around the origin.
    Vec in_ball(int d, double r) {
        return unit_vector(d) * (r * std::pow(uniform(), 1.0 / d));
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Formatting: shortest decimal representation that round-trips exactly.
// ---------------------------------------------------------------------------

[[nodiscard]] inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return {buf.data(), ptr};
}

[[nodiscard]] inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("not a number: '" + std::string(s) + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Order-preserving parallel loop. Each index is processed exactly once and
// results are written by index, so output never depends on `jobs`.
// ---------------------------------------------------------------------------

template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace hpl
