#include <cmath>

#include <gtest/gtest.h>

#include "sspolicy/costs.hpp"
#include "sspolicy/models.hpp"

using namespace sspolicy;

TEST(OrderingCost, DbmLinear) {
    DbmParams p;
    p.k1 = 1;
    p.k2 = 1;
    auto c = dbm_costs(p);
    EXPECT_DOUBLE_EQ(ordering_cost(c, -1.0, 2.0), 4.0);
    EXPECT_DOUBLE_EQ(ordering_cost(c, 0.5, 0.5), 1.0);
}

TEST(OrderingCost, GbmConcaveShape) {
    GbmParams p;
    p.k1 = 1;
    p.k2 = 2;
    p.eta = 0.5;
    auto c = gbm_costs(p);
    EXPECT_NEAR(ordering_cost(c, 1.0, 4.0), 3.0, 1e-14);
}

TEST(OrderingCost, RejectsDownwardOrder) {
    auto c = dbm_costs(DbmParams{});
    EXPECT_THROW(ordering_cost(c, 2.0, 1.0), DomainError);
}

TEST(OrderingCost, EqualDisplacementDependsOnLevelForConcaveShape) {
    GbmParams p;
    p.eta = 0.5;
    auto c = gbm_costs(p);
    EXPECT_GT(c.c1(1.0, 2.0), c.c1(5.0, 6.0));
    auto d = dbm_costs(DbmParams{1, 1, 1, 1, 1, 0.7});
    EXPECT_NEAR(d.c1(1.0, 2.0), d.c1(5.0, 6.0), 1e-14);
}

TEST(OrderingCost, DerivativesMatchFiniteDifferences) {
    GbmParams p;
    p.eta = 0.6;
    p.k2 = 1.3;
    auto c = gbm_costs(p);
    CostModel numeric = c;
    numeric.Hp = nullptr;
    numeric.Hpp = nullptr;
    for (double y : {0.2, 1.0, 3.0}) {
        EXPECT_NEAR(c.dc1_dy(y, 5.0), numeric.dc1_dy(y, 5.0), 1e-7);
        EXPECT_NEAR(c.dc1_dz(0.1, y), numeric.dc1_dz(0.1, y), 1e-7);
        EXPECT_NEAR(c.d2c1_dy2(y, 5.0), numeric.d2c1_dy2(y, 5.0), 1e-4);
    }
}

namespace {

CostValidationReport validate(const GbmParams& p) {
    ScaleSpeed ss(gbm_model(p));
    return validate_costs(ss, classify_boundaries(ss), gbm_costs(p));
}

}  // namespace

TEST(CostValidation, StandardGbmPasses) {
    auto r = validate(GbmParams{});
    EXPECT_EQ(r.infCompactOk, TriState::pass);
    EXPECT_EQ(r.limitAtAOk, TriState::pass);
    EXPECT_EQ(r.c0MIntegrableOk, TriState::pass);
    EXPECT_EQ(r.doubleIntegralDivergesOk, TriState::pass);
    EXPECT_EQ(r.orderingShapeOk, TriState::pass);
    EXPECT_EQ(r.overall(), TriState::pass);
}

TEST(CostValidation, NoBackorderPenaltyFailsInfCompactness) {
    GbmParams p;
    p.k4 = 0;
    auto r = validate(p);
    EXPECT_EQ(r.infCompactOk, TriState::fail);
    EXPECT_FALSE(r.witnesses.empty());
}

TEST(CostValidation, NoHoldingCostFailsAtInfinity) {
    GbmParams p;
    p.k3 = 0;
    auto r = validate(p);
    EXPECT_NE(r.overall(), TriState::pass);
}

TEST(CostValidation, DbmPasses) {
    DbmParams p;
    ScaleSpeed ss(dbm_model(p));
    auto r = validate_costs(ss, classify_boundaries(ss), dbm_costs(p));
    EXPECT_EQ(r.overall(), TriState::pass);
}

TEST(CostValidation, ReflectedDbmBoundedAtReflectingEnd) {
    DbmParams p;
    p.reflected = true;
    ScaleSpeed ss(dbm_model(p));
    auto r = validate_costs(ss, classify_boundaries(ss), dbm_costs(p));
    // {c0 <= L} = [0, L/c_h] is compact in [0, inf), but c0(0) = 0 is finite at the attainable end
    EXPECT_EQ(r.infCompactOk, TriState::pass);
    EXPECT_EQ(r.limitAtAOk, TriState::fail);
    EXPECT_EQ(r.c0MIntegrableOk, TriState::pass);
    EXPECT_EQ(r.doubleIntegralDivergesOk, TriState::pass);
}
