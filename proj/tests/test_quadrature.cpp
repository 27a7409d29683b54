#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <span>

#include "hpl/cubature.hpp"
#include "hpl/quadrature.hpp"

using namespace hpl;

TEST(Quadrature, SmoothIntegrals) {
    const auto r = quad::integrate([](double x) { return std::exp(x); }, 0.0, 1.0, {});
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, std::numbers::e - 1.0, 1e-13);
    const auto s = quad::integrate([](double x) { return std::sin(x) * std::sin(x); }, 0.0, std::numbers::pi, {});
    EXPECT_NEAR(s.value, std::numbers::pi / 2.0, 1e-12);
}

TEST(Quadrature, EndpointSingularities) {
    const auto a = quad::integrate([](double x) { return x > 0 ? 1.0 / std::sqrt(x) : 0.0; }, 0.0, 1.0, {1e-12, 1e-14, 4000});
    EXPECT_NEAR(a.value, 2.0, 1e-9);
    const auto b = quad::integrate([](double x) { return x > 0 ? std::log(x) : 0.0; }, 0.0, 1.0, {1e-12, 1e-14, 4000});
    EXPECT_NEAR(b.value, -1.0, 1e-10);
}

TEST(Quadrature, BreakpointsHandleJumps) {
    const std::array<double, 3> br{0.0, 0.3, 1.0};
    const auto r = quad::integrate([](double x) { return x < 0.3 ? 1.0 : 2.0; }, std::span<const double>(br), {});
    EXPECT_NEAR(r.value, 0.3 + 1.4, 1e-14);
}

TEST(Quadrature, BudgetExhaustionIsReported) {
    const auto r = quad::integrate([](double x) { return std::sin(1.0 / (x + 1e-9)); }, 0.0, 1.0, {1e-14, 1e-16, 5});
    EXPECT_FALSE(r.converged);
}

TEST(GaussLegendre, ExactForDegree2nMinus1) {
    for (int n : {4, 8, 16}) {
        const auto& rule = quad::gauss_legendre(n);
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], 2 * n - 2);
        EXPECT_NEAR(s, 2.0 / (2 * n - 1), 1e-14) << n;
    }
}

TEST(ChebyshevProfile, InterpolatesToTolerance) {
    auto f = [](double x) { return std::exp(-x) / (1.0 + x * x); };
    const std::array<double, 3> br{0.0, 1.0, 5.0};
    const auto p = quad::ChebyshevProfile::build(f, std::span<const double>(br), 1e-12);
    for (double x = 0.0; x <= 5.0; x += 0.01) EXPECT_NEAR(p(x), f(x), 1e-11);
}

TEST(Cubature, IntegrateIntervalResolvesSinInverse) {
    // Int_0^1 sin(1/x) dx = sin(1) - Ci(1), Ci(1) = 0.337403922900968134662646203889.
    CubatureOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-12;
    const auto r =
        integrate_interval([](double x) { return x > 0 ? std::sin(1.0 / x) : 0.0; }, 0.0, 1.0, {}, true, opt);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, std::sin(1.0) - 0.337403922900968134662646203889, 1e-9);
}

TEST(Cubature, CapAreasAreConsistent) {
    // A cap with tau = -1 is the whole sphere, tau = 1 is empty.
    for (int d = 2; d <= 4; ++d) {
        EXPECT_NEAR(cap_area(d, -1.0), sphere_area(d - 1), 1e-12);
        EXPECT_NEAR(cap_area(d, 1.0), 0.0, 1e-12);
        EXPECT_NEAR(cap_area(d, 0.0), 0.5 * sphere_area(d - 1), 1e-12);
    }
}
