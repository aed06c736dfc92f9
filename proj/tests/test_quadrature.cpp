#include <cmath>

#include <gtest/gtest.h>

#include "sspolicy/extended_real.hpp"
#include "sspolicy/quadrature.hpp"

using namespace sspolicy;

TEST(Quadrature, PolynomialOnUnitInterval) {
    EXPECT_NEAR(quad::integrate([](double x) { return x * x; }, 0.0, 1.0), 1.0 / 3.0, 1e-14);
}

TEST(Quadrature, SineOverHalfPeriod) {
    EXPECT_NEAR(quad::integrate([](double x) { return std::sin(x); }, 0.0, M_PI), 2.0, 1e-13);
}

TEST(Quadrature, ReversedLimitsFlipSign) {
    double a = quad::integrate([](double x) { return std::exp(x); }, 0.0, 2.0);
    double b = quad::integrate([](double x) { return std::exp(x); }, 2.0, 0.0);
    EXPECT_NEAR(a, std::expm1(2.0), 1e-12);
    EXPECT_NEAR(a, -b, 1e-13);
}

TEST(Quadrature, KinkedIntegrand) {
    double v = quad::integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0);
    EXPECT_NEAR(v, 0.5 * 0.09 + 0.5 * 0.49, 1e-10);
}

TEST(IntegrateToward, ExponentialTailConverges) {
    ExtReal v = quad::integrate_toward([](double x) { return std::exp(-x); }, 0.0, INFINITY);
    ASSERT_TRUE(v.is_finite());
    EXPECT_NEAR(v.value(), 1.0, 1e-9);
}

TEST(IntegrateToward, LeftwardTail) {
    ExtReal v = quad::integrate_toward([](double x) { return std::exp(2 * x); }, 1.0, -INFINITY);
    ASSERT_TRUE(v.is_finite());
    EXPECT_NEAR(v.value(), 0.5 * std::exp(2.0), 1e-8);
}

TEST(IntegrateToward, HarmonicTailDiverges) {
    ExtReal v = quad::integrate_toward([](double x) { return 1.0 / x; }, 1.0, INFINITY);
    EXPECT_TRUE(v.is_infinite());
}

TEST(IntegrateToward, IntegrableSingularityAtFiniteEnd) {
    ExtReal v = quad::integrate_toward([](double x) { return 1.0 / std::sqrt(x); }, 1.0, 0.0);
    ASSERT_TRUE(v.is_finite());
    EXPECT_NEAR(v.value(), 2.0, 1e-6);
}

TEST(IntegrateToward, NonIntegrableSingularityAtFiniteEnd) {
    ExtReal v = quad::integrate_toward([](double x) { return 1.0 / x; }, 1.0, 0.0);
    EXPECT_TRUE(v.is_infinite());
}

TEST(IntegrateToward, ConstantIsInfinite) {
    EXPECT_TRUE(quad::integrate_toward([](double) { return 1.0; }, 0.0, INFINITY).is_infinite());
}

TEST(IntegrateNested, GammaTwo) {
    // \int_0^inf e^{-u} \int_0^u dv du = Gamma(2) = 1
    ExtReal v = quad::integrate_nested_toward([](double u) { return std::exp(-u); }, [](double) { return 1.0; }, 0.0,
                                              INFINITY);
    ASSERT_TRUE(v.is_finite());
    EXPECT_NEAR(v.value(), 1.0, 1e-6);
}

TEST(IntegrateNested, DivergentInner) {
    ExtReal v = quad::integrate_nested_toward([](double u) { return std::exp(-u); }, [](double v) { return std::exp(v); },
                                              0.0, INFINITY);
    EXPECT_TRUE(v.is_infinite());
}

TEST(ExtReal, Arithmetic) {
    EXPECT_TRUE((ExtReal::finite(1) + ExtReal::infinity()).is_infinite());
    EXPECT_TRUE((ExtReal::finite(1) + ExtReal::indeterminate()).is_indeterminate());
    EXPECT_DOUBLE_EQ((ExtReal::finite(1) + ExtReal::finite(2.5)).value(), 3.5);
    EXPECT_EQ(ExtReal::infinity().to_string(), "inf");
}

TEST(TriState, Conjunction) {
    EXPECT_EQ(tri_and(TriState::pass, TriState::pass), TriState::pass);
    EXPECT_EQ(tri_and(TriState::pass, TriState::fail), TriState::fail);
    EXPECT_EQ(tri_and(TriState::indeterminate, TriState::fail), TriState::fail);
    EXPECT_EQ(tri_and(TriState::indeterminate, TriState::pass), TriState::indeterminate);
}
