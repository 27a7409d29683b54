#include <gtest/gtest.h>

#include <cmath>

#include "hpl/experiments.hpp"
#include "hpl/semigroup.hpp"

using namespace hpl;

namespace {

ComplexMeasure two_atoms(int d) {
    ComplexMeasure m;
    m.d = d;
    m.atoms.push_back({Vec::unit(d, 0) * 0.5, Complex(2.0, -1.0)});
    m.atoms.push_back({Vec::zero(d), Complex(0.5, 0.0)});
    return m;
}

ComplexMeasure oscillating(int d) {
    return corpus::ac_measure(d, "osc", "sin(3*r) + 0.25", Vec::zero(d), 1.5);
}

}  // namespace

TEST(Apply, GaussianIsAnEigenfunction) {
    for (int d : {1, 2}) {
        const auto cfg = KernelConfig::calibrated(d);
        const Vec x = Vec::unit(d, 0) * 0.7;
        for (double t : {0.2, 0.8}) {
            const double want = std::exp(-t * std::sqrt(static_cast<double>(d))) * std::exp(-0.5 * norm2(x));
            EXPECT_NEAR(apply(cfg, corpus::gaussian(d), t, x).real() / want, 1.0, 1e-7) << d << ' ' << t;
        }
    }
}

TEST(Apply, AtomsReproduceTheKernel) {
    const auto cfg = KernelConfig::calibrated(2);
    const Vec x{0.3, -0.4};
    const auto m = two_atoms(2);
    const double t = 0.25;
    const Complex want = m.atoms[0].weight * poisson_hermite(cfg, t, x, m.atoms[0].point) +
                         m.atoms[1].weight * poisson_hermite(cfg, t, x, m.atoms[1].point);
    EXPECT_NEAR(std::abs(apply(cfg, m, t, x) - want) / std::abs(want), 0.0, 1e-10);
}

TEST(Apply, DiagonalBlowUpOfAnAtom) {
    for (int d : {1, 2, 3}) {
        const auto cfg = KernelConfig::calibrated(d);
        const auto delta = corpus::delta(d, Vec::zero(d));
        std::vector<double> ts, vs;
        for (double t : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
            ts.push_back(t);
            vs.push_back(apply(cfg, delta, t, Vec::zero(d)).real());
        }
        EXPECT_NEAR(fit_log_slope(ts, vs), -d, 0.05) << d;
    }
}

TEST(Apply, OffAtomValueVanishes) {
    const auto cfg = KernelConfig::calibrated(2);
    const auto delta = corpus::delta(2, Vec::zero(2));
    const auto ts = dyadic_times(3, 9);
    std::vector<double> vs;
    for (double t : ts) vs.push_back(apply_tv(cfg, delta, 0.0, t, Vec::unit(2, 0)));
    for (std::size_t i = 1; i < vs.size(); ++i) EXPECT_LT(vs[i], vs[i - 1]);
    EXPECT_TRUE(analyze_trend(ts, vs).converges);
}

TEST(Apply, Linearity) {
    const int d = 2;
    const auto cfg = KernelConfig::calibrated(d);
    const auto m1 = oscillating(d), m2 = two_atoms(d);
    const Complex a(1.5, 0.5), b(-0.75, 2.0);
    const Vec x{0.2, 0.1};
    const Complex lhs = apply(cfg, combine(a, m1, b, m2), 0.3, x);
    const Complex rhs = a * apply(cfg, m1, 0.3, x) + b * apply(cfg, m2, 0.3, x);
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-8 * (1.0 + std::abs(rhs)));
}

TEST(Apply, PositivityAndTriangleInequality) {
    for (int d : {1, 3}) {
        const auto cfg = KernelConfig::calibrated(d);
        const auto nu = oscillating(d);
        const auto tv = total_variation(nu);
        for (double t : {0.05, 0.5})
            for (double a : {0.0, 0.6, 2.0}) {
                const Vec x = Vec::unit(d, 0) * a;
                const double mass = apply(cfg, tv, t, x).real();
                EXPECT_GT(mass, 0.0);
                EXPECT_LE(std::abs(apply(cfg, nu, t, x)), mass * (1.0 + 1e-9));
            }
    }
}

TEST(Correction, MatchesItsDefinition) {
    const int d = 2;
    const auto cfg = KernelConfig::calibrated(d);
    const auto nu = oscillating(d);
    const Vec x{0.1, 0.05};
    const Ball work = working_ball(nu, Vec::zero(d));
    EXPECT_EQ(correction_E(cfg, nu, 0.0, 0.1, x, work), Complex(0.0));
    const Complex ell(0.8, -0.2);
    const double t = 0.1;
    const Complex direct = (apply(cfg, nu, t, x) - ell) - apply(cfg, subtract_lebesgue(nu, ell, work), t, x);
    EXPECT_NEAR(std::abs(correction_E(cfg, nu, ell, t, x, work) - direct), 0.0, 1e-8);
}

TEST(Pde, ResidualIsSmallAndSecondOrder) {
    const auto cfg = KernelConfig::calibrated(1);
    const auto nu = corpus::gaussian(1);
    const Vec x{0.5};
    EXPECT_LT(pde_residual(cfg, nu, 1.0, x), 1e-3);
    const double rc = pde_residual(cfg, nu, 1.0, x, 0.02), rf = pde_residual(cfg, nu, 1.0, x, 0.01);
    EXPECT_NEAR(rc / rf, 4.0, 1.2);
    EXPECT_THROW((void)pde_residual(cfg, nu, 0.1, x, 0.06), PreconditionError);
}

TEST(Apply, Validation) {
    const auto cfg = KernelConfig::calibrated(2);
    EXPECT_THROW((void)apply(cfg, corpus::gaussian(2), 0.0, Vec::zero(2)), DomainError);
    EXPECT_THROW((void)apply(cfg, corpus::gaussian(2), 0.5, Vec::zero(3)), DomainError);
    EXPECT_THROW((void)apply(KernelConfig::calibrated(1), corpus::gaussian(2), 0.5, Vec::zero(2)), DomainError);
}

TEST(ConeScan, GaussianConvergesAndIgnoresJobs) {
    const auto cfg = KernelConfig::calibrated(1);
    const auto nu = corpus::gaussian(1);
    ConeScanSpec spec;
    spec.cone = {Vec{0.25}, 1.0};
    spec.t_grid = dyadic_times(3, 8);
    spec.seed = 7;
    ConeScanOptions opt;
    const ScanReport one = cone_scan(cfg, nu, spec, opt);
    opt.jobs = 3;
    const ScanReport three = cone_scan(cfg, nu, spec, opt);
    EXPECT_EQ(one.to_csv(), three.to_csv());
    EXPECT_TRUE(cone_trend(one).converges);
    // frac = 0 once per t, then both axis directions for each positive fraction.
    EXPECT_EQ(one.rows.size(), spec.t_grid.size() * 5);
}

TEST(ConeScan, TvQuantityAroundAnAtomDiverges) {
    const auto cfg = KernelConfig::calibrated(1);
    ConeScanSpec spec;
    spec.cone = {Vec{0.0}, 1.0};
    spec.t_grid = dyadic_times(3, 8);
    spec.expected_ell = 0.0;
    ConeScanOptions opt;
    opt.quantity = ConeQuantity::tv;
    EXPECT_TRUE(cone_trend(cone_scan(cfg, corpus::delta(1, Vec{0.0}), spec, opt)).diverges);
}

TEST(ConeScan, Validation) {
    const auto cfg = KernelConfig::calibrated(2);
    ConeScanSpec spec;
    spec.cone = {Vec::zero(2), 1.0};
    spec.t_grid = {0.1, 0.2};
    EXPECT_THROW((void)cone_scan(cfg, corpus::gaussian(2), spec), DomainError);
    spec.t_grid = {0.2, 0.1};
    spec.aperture_fracs = {1.5};
    EXPECT_THROW((void)cone_scan(cfg, corpus::gaussian(2), spec), DomainError);
    spec.aperture_fracs = {0.0};
    spec.cone.alpha = 0.0;
    EXPECT_THROW((void)cone_scan(cfg, corpus::gaussian(2), spec), DomainError);
}
