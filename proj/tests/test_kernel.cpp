#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hpl/kernel.hpp"
#include "hpl/trend.hpp"

using namespace hpl;

namespace {

const KernelConfig& config(int d) {
    static const KernelConfig c[] = {KernelConfig::calibrated(1), KernelConfig::calibrated(2),
                                     KernelConfig::calibrated(3)};
    return c[d - 1];
}

// 30-digit values from an independent tanh-sinh evaluation of the kernel
// integral in the original variable, with normalization 4/(sqrt(pi)(4pi)^{d/2}).
struct Golden {
    int d;
    double t, a, b;
    KernelRange range;
    double value;
};

const Golden kGolden[] = {
    {1, 1.0, 0.0, 0.0, KernelRange::full, 0.259553271994330757667},
    {1, 1.0, 1.0, 4.0, KernelRange::full, 0.0661075682191902103938},
    {3, 0.1, 0.01, 4.01, KernelRange::full, 25.2026611206317766552},
    {1, 0.001, 0.0, 4.0, KernelRange::full, 318.308678657910129611},
    {2, 0.5, 1.0, 1.0, KernelRange::local, 0.0388672744711392877679},
    {2, 0.5, 1.0, 1.0, KernelRange::global, 0.00516738738595502877128},
};

}  // namespace

TEST(Elementary, LogRatio) {
    EXPECT_NEAR(log_ratio(0.5), 2.0 * std::log(3.0), 1e-15);
    EXPECT_NEAR(log_ratio(1e-12), 0.0, 1e-11);
    EXPECT_LT(log_ratio(0.3), log_ratio(0.6));
}

TEST(Elementary, PhiValues) {
    EXPECT_DOUBLE_EQ(phi(Vec::zero(3)), 1.0);
    EXPECT_NEAR(phi(Vec{1.0}), 0.284977681862601017761802908495, 1e-15);
    for (int d = 1; d <= 4; ++d)
        for (double r = 0.0; r < 6.0; r += 0.25) EXPECT_GT(phi_radial(d, r), phi_radial(d, r + 0.25));
}

TEST(Elementary, ClassicalPoisson) {
    for (int d = 1; d <= 3; ++d) {
        EXPECT_DOUBLE_EQ(classical_poisson(1.0, Vec::zero(d)), 1.0);
        EXPECT_NEAR(classical_poisson(0.5, Vec::zero(d)), std::pow(0.5, -d), 1e-12);
        const Vec z = Vec::unit(d, 0) * 0.7;
        const double lam = 2.5;
        EXPECT_NEAR(classical_poisson(lam * 0.3, z * lam), std::pow(lam, -d) * classical_poisson(0.3, z), 1e-12);
    }
}

TEST(Calibration, MatchesClosedFormAndIsTimeIndependent) {
    EXPECT_NEAR(calibrate_cd(1), 2.0 / std::numbers::pi, 1e-14);
    for (int d = 1; d <= 5; ++d) {
        const double cd = calibrate_cd(d);
        EXPECT_NEAR(cd / cd_closed_form(d), 1.0, 1e-10) << d;
        const double at_quarter = std::exp(-0.25 * std::sqrt(d)) / detail::gaussian_image_unit_cd(d, 0.25, 1e-12);
        EXPECT_NEAR(at_quarter / cd, 1.0, 1e-6) << d;
    }
}

TEST(Kernel, GoldenValues) {
    for (const auto& g : kGolden) {
        const KernelValue kv = kernel_integral(config(g.d), g.t, g.a, g.b, g.range);
        EXPECT_TRUE(kv.converged);
        EXPECT_NEAR(kv.value / g.value, 1.0, 1e-8) << "d=" << g.d << " t=" << g.t << " a=" << g.a << " b=" << g.b;
        EXPECT_GT(kv.error, 0.0);
        EXPECT_LT(kv.error, 1e-6 * g.value);
    }
}

TEST(Kernel, PointEvaluationMatchesGolden) {
    EXPECT_NEAR(poisson_hermite(config(1), 1.0, Vec{0.0}, Vec{0.0}), 0.259553271994330757667, 1e-9);
    EXPECT_NEAR(poisson_hermite(config(1), 1.0, Vec{1.5}, Vec{0.5}), 0.0661075682191902103938, 1e-10);
}

TEST(Kernel, SymmetryAndPositivity) {
    Rng rng(11);
    for (int d = 1; d <= 3; ++d)
        for (int i = 0; i < 60; ++i) {
            const double t = std::pow(10.0, rng.uniform(-2.0, 0.5));
            const Vec x = rng.in_ball(d, 3.0), y = rng.in_ball(d, 3.0);
            const double pxy = poisson_hermite(config(d), t, x, y), pyx = poisson_hermite(config(d), t, y, x);
            EXPECT_GT(pxy, 0.0);
            EXPECT_NEAR(pxy, pyx, 1e-8 * pxy);
        }
}

TEST(Kernel, DecompositionIsConsistent) {
    Rng rng(12);
    for (int d = 1; d <= 3; ++d)
        for (int i = 0; i < 30; ++i) {
            const double t = std::pow(10.0, rng.uniform(-2.0, 0.0));
            const Vec x = rng.in_ball(d, 2.0), y = rng.in_ball(d, 2.0);
            const double p = poisson_hermite(config(d), t, x, y);
            const double p0 = poisson_hermite_local(config(d), t, x, y);
            const double p1 = poisson_hermite_global(config(d), t, x, y);
            EXPECT_LE(p0, p * (1 + 1e-9));
            EXPECT_NEAR(p, p0 + p1, 1e-8 * p);
            const double k = radial_part(config(d), t, x, dist(x, y));
            const double rem = remainder_part(config(d), t, x, y - x);
            EXPECT_NEAR(p0, k + rem, 1e-8 * p0);
        }
}

TEST(Kernel, RadialPartAtOriginIsLocalKernel) {
    for (int d = 1; d <= 3; ++d)
        for (double r : {0.0, 0.1, 0.7, 2.0}) {
            const Vec h = Vec::unit(d, 0) * r;
            EXPECT_NEAR(radial_part(config(d), 0.2, Vec::zero(d), r),
                        poisson_hermite_local(config(d), 0.2, Vec::zero(d), h),
                        1e-9 * poisson_hermite_local(config(d), 0.2, Vec::zero(d), h));
        }
}

TEST(Kernel, RemainderVanishesAtZeroOffset) {
    for (int d = 1; d <= 3; ++d) EXPECT_EQ(remainder_part(config(d), 0.3, Vec::unit(d, 0), Vec::zero(d)), 0.0);
}

TEST(Kernel, RadialPartDecreasesInR) {
    Rng rng(13);
    for (int d = 1; d <= 3; ++d)
        for (int i = 0; i < 40; ++i) {
            const double t = std::pow(10.0, rng.uniform(-2.0, 0.0));
            const Vec x = rng.in_ball(d, 2.0);
            const double r1 = rng.uniform(0.0, 3.0), r2 = r1 + rng.uniform(0.01, 1.0);
            EXPECT_GT(radial_part(config(d), t, x, r1), radial_part(config(d), t, x, r2));
        }
}

TEST(Kernel, DiagonalBlowUpHasSlopeMinusD) {
    for (int d = 1; d <= 3; ++d) {
        std::vector<double> ts, vs;
        for (int k = 5; k <= 10; ++k) {
            ts.push_back(std::ldexp(1.0, -k));
            vs.push_back(poisson_hermite(config(d), ts.back(), Vec::zero(d), Vec::zero(d)));
        }
        EXPECT_NEAR(fit_log_slope(ts, vs), -static_cast<double>(d), 0.1);
    }
}

TEST(Kernel, SphereMeanAgreesWithPointValuesInOneD) {
    // In d = 1 the "sphere" of radius rho around c is {c - rho, c + rho}.
    const auto& cfg = config(1);
    const Vec x{0.3}, c{-0.2};
    const double rho = 0.45;
    const double mean = kernel_sphere_mean(cfg, 0.25, x, c, rho).value;
    const double pts = poisson_hermite(cfg, 0.25, x, Vec{c[0] + rho}) + poisson_hermite(cfg, 0.25, x, Vec{c[0] - rho});
    EXPECT_NEAR(mean, pts, 1e-9 * pts);
}

TEST(Kernel, RejectsBadInput) {
    KernelConfig bad = config(1);
    bad.c_d = -1.0;
    EXPECT_THROW(bad.validate(), DomainError);
    EXPECT_THROW((void)calibrate_cd(0), DomainError);
    EXPECT_THROW((void)radial_part(config(1), 1.0, Vec{0.0}, -1.0), DomainError);
}

TEST(ConeComparability, ExactInequalityOnSamples) {
    for (int d = 1; d <= 3; ++d)
        for (double alpha : {0.5, 1.0, 2.0}) {
            const ConeParams cone{Vec::unit(d, 0) * 0.3, alpha};
            const auto samples = sample_cone(cone, 2000, 5 + d);
            const auto rep = cone_comparability_check(cone, samples);
            EXPECT_EQ(rep.violations, 0u);
            EXPECT_DOUBLE_EQ(rep.constant, alpha + 1.0);
        }
}

TEST(ConeComparability, DegenerateAndBoundaryPoints) {
    const ConeParams cone{Vec{0.0, 0.0}, 2.0};
    const ConeSample at_vertex{0.1, Vec{0.0, 0.0}, Vec{1.0, 1.0}};
    const auto rep = cone_comparability_check(cone, {at_vertex});
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_DOUBLE_EQ(rep.max_upper_ratio, 1.0);
    EXPECT_DOUBLE_EQ(rep.max_lower_ratio, 1.0);
    const ConeSample on_edge{0.25, Vec{0.5, 0.0}, Vec{-1.0, 0.0}};
    EXPECT_EQ(cone_comparability_check(cone, {on_edge}).violations, 0u);
    const ConeSample outside{0.1, Vec{1.0, 0.0}, Vec{0.0, 0.0}};
    EXPECT_THROW((void)cone_comparability_check(cone, {outside}), PreconditionError);
}

TEST(BoundRatios, FiniteAndPositiveOnStandardGrid) {
    for (int d = 1; d <= 3; ++d)
        for (double t : {0.1, 1.0})
            for (const Vec& x : {Vec::zero(d), Vec::unit(d, 0)}) {
                std::vector<Vec> ys;
                for (int i = 0; i <= 32; ++i) ys.push_back(Vec::unit(d, 0) * (8.0 * i / 32.0));
                const auto rep = bound_ratio_report(config(d), t, x, ys);
                const auto col = rep.column_values("P_over_Phi");
                for (double v : col) {
                    EXPECT_GT(v, 0.0);
                    EXPECT_TRUE(std::isfinite(v));
                }
            }
}
