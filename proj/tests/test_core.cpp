#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "hpl/core.hpp"

using namespace hpl;

TEST(FormatDouble, ShortestFormRoundTrips) {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.uniform(-300.0, 300.0)));
        EXPECT_EQ(parse_double(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1e-9), "1e-09");
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(ParseDouble, RejectsTrailingGarbage) {
    EXPECT_THROW((void)parse_double("1.5x"), ConfigError);
    EXPECT_THROW((void)parse_double(""), ConfigError);
    EXPECT_DOUBLE_EQ(parse_double("-2.5e-3"), -2.5e-3);
}

TEST(Vec, ArithmeticAndNorms) {
    const Vec a{3.0, 4.0};
    EXPECT_DOUBLE_EQ(norm(a), 5.0);
    EXPECT_DOUBLE_EQ(dist(a, Vec::zero(2)), 5.0);
    EXPECT_DOUBLE_EQ(dot(a, Vec::unit(2, 1)), 4.0);
    EXPECT_THROW(Vec(kMaxDim + 1), DomainError);
    EXPECT_THROW(Vec(0), DomainError);
}

TEST(Geometry, BallVolumes) {
    EXPECT_NEAR(unit_ball_volume(1), 2.0, 1e-15);
    EXPECT_NEAR(unit_ball_volume(2), std::numbers::pi, 1e-15);
    EXPECT_NEAR(unit_ball_volume(3), 4.0 * std::numbers::pi / 3.0, 1e-14);
    EXPECT_NEAR(ball_volume(2, 2.0), 4.0 * std::numbers::pi, 1e-14);
    EXPECT_NEAR(sphere_area(1), 2.0 * std::numbers::pi, 1e-14);
}

TEST(Rng, SeededStreamsRepeat) {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        differs = differs || x != c.uniform();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, UnitVectorsAndBallSamples) {
    Rng rng(1);
    for (int d = 1; d <= 5; ++d)
        for (int i = 0; i < 200; ++i) {
            EXPECT_NEAR(norm(rng.unit_vector(d)), 1.0, 1e-14);
            EXPECT_LE(norm(rng.in_ball(d, 0.5)), 0.5 + 1e-15);
        }
}

TEST(ParallelFor, EveryIndexOnceAndOrderIndependent) {
    for (unsigned jobs : {1u, 2u, 4u}) {
        std::vector<int> hits(1000, 0);
        parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i] += static_cast<int>(i); });
        for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_EQ(hits[i], static_cast<int>(i));
    }
}

TEST(ParallelFor, PropagatesExceptions) {
    EXPECT_THROW(parallel_for(10, 2, [](std::size_t i) {
                     if (i == 3) throw DomainError("boom");
                 }),
                 DomainError);
}
