#include <cmath>

#include <gtest/gtest.h>

#include "sspolicy/diffusion.hpp"
#include "sspolicy/models.hpp"

using namespace sspolicy;

namespace {

GbmParams gbm_half() {
    GbmParams p;
    p.mu = 0.5;
    p.sigma = 1.0;
    return p;
}

DbmParams dbm_unit_drift_var2() {
    DbmParams p;
    p.mu = 1.0;
    p.sigma = std::sqrt(2.0);
    return p;
}

}  // namespace

TEST(ScaleSpeed, GbmScaleDensityByQuadrature) {
    // s(x) = x^{2 mu / sigma^2} = x
    ScaleSpeed ss(gbm_model(gbm_half(), false));
    EXPECT_NEAR(ss.scale_density(2.0), 2.0, 1e-12);
    EXPECT_NEAR(ss.scale_density(1.0), 1.0, 1e-15);
    EXPECT_NEAR(ss.scale_density(1e-3), 1e-3, 1e-14);
    EXPECT_NEAR(ss.scale_density(1e4), 1e4, 1e-7);
}

TEST(ScaleSpeed, DbmScaleDensityByQuadrature) {
    // s(x) = exp(2 mu x / sigma^2) = e^x
    ScaleSpeed ss(dbm_model(dbm_unit_drift_var2(), false));
    EXPECT_NEAR(ss.scale_density(1.0), std::exp(1.0), 1e-12);
    EXPECT_NEAR(ss.scale_density(-3.0), std::exp(-3.0), 1e-14);
}

TEST(ScaleSpeed, QuadratureAgreesWithExactLogScale) {
    ScaleSpeed exact(gbm_model(gbm_half(), true)), numeric(gbm_model(gbm_half(), false));
    for (double x : {1e-6, 0.01, 0.3, 1.7, 25.0, 3e5})
        EXPECT_NEAR(exact.log_scale(x), numeric.log_scale(x), 1e-11 * (1 + std::abs(exact.log_scale(x))));
}

TEST(ScaleSpeed, GbmMeasures) {
    ScaleSpeed ss(gbm_model(gbm_half()));
    // S[1,2] = \int_1^2 x dx, M[1,2] = \int_1^2 x^{-3} dx
    ExtReal S = ss.scale_measure(1.0, 2.0), M = ss.speed_measure(1.0, 2.0);
    ASSERT_TRUE(S.is_finite());
    ASSERT_TRUE(M.is_finite());
    EXPECT_NEAR(S.value(), 1.5, 1e-12);
    EXPECT_NEAR(M.value(), 0.375, 1e-12);
    EXPECT_DOUBLE_EQ(ss.scale_measure(1.5, 1.5).value(), 0.0);
}

TEST(ScaleSpeed, GbmMeasuresToBoundaries) {
    ScaleSpeed ss(gbm_model(gbm_half()));
    ExtReal S0 = ss.scale_measure(0.0, 1.0);
    ASSERT_TRUE(S0.is_finite());
    EXPECT_NEAR(S0.value(), 0.5, 1e-8);
    EXPECT_TRUE(ss.scale_measure(1.0, INFINITY).is_infinite());
    EXPECT_TRUE(ss.speed_measure(0.0, 1.0).is_infinite());
}

TEST(ScaleSpeed, DbmMeasuresToInfinity) {
    ScaleSpeed ss(dbm_model(dbm_unit_drift_var2()));
    // m(x) = e^{-x}/2
    ExtReal M = ss.speed_measure(0.0, INFINITY);
    ASSERT_TRUE(M.is_finite());
    EXPECT_NEAR(M.value(), 0.5, 1e-9);
    EXPECT_TRUE(ss.scale_measure(0.0, INFINITY).is_infinite());
    ExtReal S = ss.scale_measure(-INFINITY, 0.0);
    ASSERT_TRUE(S.is_finite());
    EXPECT_NEAR(S.value(), 1.0, 1e-9);
}

TEST(ScaleSpeed, MeasureRejectsReversedInterval) {
    ScaleSpeed ss(gbm_model(gbm_half()));
    EXPECT_THROW(ss.scale_measure(2.0, 1.0), DomainError);
    EXPECT_THROW(ss.log_scale(-1.0), DomainError);
}

TEST(Boundaries, DbmNaturalAndAdmissible) {
    auto r = classify_boundaries(dbm_model(dbm_unit_drift_var2()));
    EXPECT_EQ(r.leftClass, BoundaryClass::natural);
    EXPECT_EQ(r.rightClass, BoundaryClass::natural);
    EXPECT_TRUE(r.leftAttracting);
    EXPECT_FALSE(r.rightAttracting);
    EXPECT_EQ(r.admissible, TriState::pass);
}

TEST(Boundaries, GbmNaturalAndAdmissible) {
    auto r = classify_boundaries(gbm_model(gbm_half()));
    EXPECT_EQ(r.leftClass, BoundaryClass::natural);
    EXPECT_EQ(r.rightClass, BoundaryClass::natural);
    EXPECT_FALSE(r.leftAttainable);
    EXPECT_EQ(r.admissible, TriState::pass);
}

TEST(Boundaries, ReflectedDbmLeftRegular) {
    DbmParams p;
    p.reflected = true;
    auto r = classify_boundaries(dbm_model(p));
    EXPECT_EQ(r.leftClass, BoundaryClass::regular);
    EXPECT_TRUE(r.leftAttainable);
    EXPECT_EQ(r.admissible, TriState::pass);
}

TEST(Boundaries, UpwardDriftIsInadmissible) {
    DiffusionModel m;
    m.drift = [](double) { return 1.0; };
    m.diffusion = [](double) { return 1.0; };
    auto r = classify_boundaries(m);
    EXPECT_FALSE(r.leftAttracting);
    EXPECT_TRUE(r.rightAttracting);
    EXPECT_EQ(r.admissible, TriState::fail);
}

TEST(Boundaries, DriftlessBrownianMotionIsInadmissible) {
    DiffusionModel m;
    m.drift = [](double) { return 0.0; };
    m.diffusion = [](double) { return 1.0; };
    auto r = classify_boundaries(m);
    EXPECT_FALSE(r.leftAttracting);
    EXPECT_EQ(r.admissible, TriState::fail);
}

TEST(Boundaries, BesselSquaredEntranceAtZero) {
    // dX = 3 dt + 2 sqrt(X) dW, the squared Bessel process of dimension 3
    DiffusionModel m;
    m.drift = [](double) { return 3.0; };
    m.diffusion = [](double x) { return 2.0 * std::sqrt(x); };
    m.left = 0.0;
    m.anchor = 1.0;
    auto r = classify_boundaries(m);
    EXPECT_EQ(r.leftClass, BoundaryClass::entrance);
}

TEST(Generator, ConstantIsAnnihilated) {
    auto m = gbm_model(gbm_half());
    EXPECT_NEAR(generator_apply(m, [](double) { return 7.0; }, 2.0), 0.0, 1e-8);
}

TEST(Generator, ScaleFunctionIsHarmonic) {
    // S(x) = (x^2 - 1)/2 for gBM with mu = 1/2, sigma = 1
    auto m = gbm_model(gbm_half());
    for (double x : {0.3, 1.0, 2.0, 5.0})
        EXPECT_NEAR(generator_apply(m, [](double v) { return 0.5 * (v * v - 1); }, x), 0.0, 1e-5 * x * x);
}

TEST(Generator, LogOnGbm) {
    // A ln x = -sigma^2/2 - mu = -1
    auto m = gbm_model(gbm_half());
    EXPECT_NEAR(generator_apply(m, [](double v) { return std::log(v); }, 2.0), -1.0, 1e-6);
    EXPECT_NEAR(generator_apply(m, 2.0, 0.5, -0.25), -1.0, 1e-15);
}

TEST(Generator, DerivativeForm) {
    auto m = dbm_model(dbm_unit_drift_var2());
    // f = x^2: A f = sigma^2 - 2 mu x
    EXPECT_NEAR(generator_apply_from_derivative(m, [](double v) { return 2 * v; }, 3.0), 2.0 - 6.0, 1e-8);
}

TEST(Generator, StencilOutsideStateSpaceThrows) {
    auto m = gbm_model(gbm_half());
    EXPECT_THROW(generator_apply(m, [](double v) { return v; }, 1e-6, 1e-3), DomainError);
}

TEST(DiffusionModel, RejectsNonPositiveDiffusion) {
    DiffusionModel m;
    m.drift = [](double) { return -1.0; };
    m.diffusion = [](double x) { return x; };
    EXPECT_THROW(m.validate(), std::invalid_argument);
}
