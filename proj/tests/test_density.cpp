#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hpl/core.hpp"
#include "hpl/density.hpp"

using namespace hpl;

namespace {

double eval_at(const DensityExpr& e, const Vec& y) { return e.eval(y); }

}  // namespace

TEST(Density, GaussianEvaluatesToOneAtOrigin) {
    const auto e = parse_density("exp(-r^2/2)");
    EXPECT_DOUBLE_EQ(eval_at(e, Vec::zero(3)), 1.0);
    EXPECT_NEAR(eval_at(e, Vec{1.0, 0.0}), std::exp(-0.5), 1e-15);
    EXPECT_TRUE(e.is_radial());
}

TEST(Density, SinInverseAtTwoOverPi) {
    const auto e = parse_density("sin(1/y1)");
    EXPECT_NEAR(eval_at(e, Vec{2.0 / std::numbers::pi}), 1.0, 1e-15);
    EXPECT_FALSE(e.is_radial());
    EXPECT_EQ(e.coordinates_used(), 1);
}

TEST(Density, TruncatedInputReportsOffsetFour) {
    try {
        (void)parse_density("1 + ");
        FAIL() << "expected a parse error";
    } catch (const ParseError& pe) {
        EXPECT_EQ(pe.offset(), 4u);
        EXPECT_FALSE(pe.expected().empty());
    }
}

TEST(Density, ErrorsCarryOffsets) {
    auto offset_of = [](const char* text) -> long {
        try {
            (void)parse_density(text);
        } catch (const ParseError& pe) {
            return static_cast<long>(pe.offset());
        }
        return -1;
    };
    EXPECT_EQ(offset_of("(1 + r"), 6);
    EXPECT_EQ(offset_of("foo(r)"), 0);
    EXPECT_EQ(offset_of("1 2"), 2);
    EXPECT_GE(offset_of("y0"), 0);
}

TEST(Density, Precedence) {
    const Vec y{0.0};
    EXPECT_DOUBLE_EQ(eval_at(parse_density("2^3^2"), y), 512.0);  // right-associative power
    EXPECT_DOUBLE_EQ(eval_at(parse_density("-2^2"), y), -4.0);    // ^ binds tighter than unary minus
    EXPECT_DOUBLE_EQ(eval_at(parse_density("8/4/2"), y), 1.0);    // left-associative division
    EXPECT_DOUBLE_EQ(eval_at(parse_density("1-2-3"), y), -4.0);
    EXPECT_DOUBLE_EQ(eval_at(parse_density("2+3*4"), y), 14.0);
    EXPECT_DOUBLE_EQ(eval_at(parse_density("(2+3)*4"), y), 20.0);
}

TEST(Density, FunctionsAndIndicators) {
    const Vec y{0.25, -0.5};
    const double r = norm(y);
    EXPECT_NEAR(eval_at(parse_density("log(r) + cos(y2) + abs(y2) + sqrt(r)"), y),
                std::log(r) + std::cos(-0.5) + 0.5 + std::sqrt(r), 1e-15);
    EXPECT_DOUBLE_EQ(eval_at(parse_density("ind(r < 0.5)"), y), 0.0);
    EXPECT_DOUBLE_EQ(eval_at(parse_density("ind(r <= 1)"), y), 1.0);
    const auto jumps = parse_density("ind(r < 0.5) + 2*ind(r <= 1.5)").radial_thresholds();
    ASSERT_EQ(jumps.size(), 2u);
    EXPECT_DOUBLE_EQ(jumps[0], 0.5);
    EXPECT_DOUBLE_EQ(jumps[1], 1.5);
}

TEST(Density, PrintParseRoundTripOnRandomPoints) {
    const char* exprs[] = {"exp(-r^2/2)",         "sin(1/y1)",          "1 + r*sin(1/r)", "-(y1 - 2)^2 / (1 + y2^2)",
                           "ind(r < 0.3) * cos(3*y2)", "sqrt(abs(y1*y2)) - log(1 + r)", "2^-r", "sin(1/r)/sqrt(r)"};
    Rng rng(3);
    for (const char* text : exprs) {
        const auto e = parse_density(text);
        const auto back = parse_density(e.print());
        EXPECT_EQ(back.print(), e.print()) << text;
        for (int i = 0; i < 100; ++i) {
            const Vec y = rng.in_ball(2, 2.0);
            const double a = eval_at(e, y), b = eval_at(back, y);
            if (std::isnan(a)) EXPECT_TRUE(std::isnan(b));
            else EXPECT_EQ(a, b) << text;
        }
    }
}
