#include <cmath>

#include <gtest/gtest.h>

#include "sspolicy/models.hpp"
#include "sspolicy/solver.hpp"

using namespace sspolicy;

namespace {

DbmParams reflected(double k5 = 1.0) {
    DbmParams p;
    p.reflected = true;
    p.mu = 1;
    p.sigma = 1;
    p.c_h = 1;
    p.k1 = 2;
    p.k2 = 0.5;
    p.k5 = k5;
    return p;
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double s = 0.5 * (f(lo) + f(hi));
    for (int i = 1; i < n; ++i) s += f(lo + h * i);
    return s * h;
}

}  // namespace

TEST(ReflectedDbm, OptimumFormula) {
    auto o = reflected_dbm_optimum(reflected());
    EXPECT_DOUBLE_EQ(o.y, 0.0);
    EXPECT_NEAR(o.z, 2.0, 1e-15);
    EXPECT_NEAR(o.F, 3.0, 1e-15);
}

TEST(ReflectedDbm, OptimumMinimizesEdgeCost) {
    auto p = reflected();
    auto o = reflected_dbm_optimum(p);
    auto ch = dbm_characteristics(p);
    auto c = dbm_costs(p);
    EXPECT_NEAR(policy_cost(ch, c, 0.0, o.z), o.F, 1e-14);
    for (double z : {1.0, 1.9, 2.1, 4.0}) EXPECT_GT(policy_cost(ch, c, 0.0, z), o.F);
    for (double y : {0.01, 0.5}) EXPECT_GT(policy_cost(ch, c, y, o.z + y), o.F);
}

TEST(ReflectedDbm, RequiresReflection) {
    DbmParams p;
    EXPECT_THROW(reflected_dbm_optimum(p), std::invalid_argument);
    EXPECT_THROW(delayed_policy_cost(p, 0.0, 1.0), std::invalid_argument);
}

TEST(JustInTime, Cost) {
    EXPECT_NEAR(jit_cost(reflected(1.0)), 1.5, 1e-15);
    EXPECT_NEAR(jit_cost(reflected(0.0)), 0.5, 1e-15);
}

TEST(JustInTime, PredicateMatchesMarginalCostSign) {
    for (double k1 : {0.5, 2.0})
        for (double k2 : {0.0, 0.5, 1.5})
            for (int i = 0; i <= 40; ++i) {
                auto p = reflected(0.125 * i);
                p.k1 = k1;
                p.k2 = k2;
                const double zs = std::sqrt(2 * k1 * p.mu / p.c_h);
                const double s = p.c_h * zs / p.mu - (p.k5 - p.k2);
                if (s == 0) continue;
                EXPECT_EQ(jit_better_than_sS(p), s > 0) << "k1=" << k1 << " k2=" << k2 << " k5=" << p.k5;
                EXPECT_EQ(jit_better_than_sS(p), jit_cost(p) < reflected_dbm_optimum(p).F);
            }
}

TEST(JustInTime, DensityIsExponential) {
    auto p = reflected();
    EXPECT_NEAR(trapezoid([&](double x) { return jit_density(p, x); }, 0, 30, 30000), 1.0, 1e-6);
    EXPECT_NEAR(jit_density(p, 0.5), 2 * std::exp(-1.0), 1e-15);
}

TEST(Delayed, ZeroReorderLevelIsOrderUpTo) {
    auto p = reflected(0.3);
    for (double z : {0.5, 2.0, 7.0}) EXPECT_NEAR(delayed_policy_cost(p, 0.0, z), dbm_F(p, 0.0, z), 1e-13);
}

TEST(Delayed, CycleLengthDecomposition) {
    auto p = reflected();
    p.sigma = 1.3;
    const double y = 0.7, z = 2.2, s2 = p.sigma * p.sigma;
    // z -> y, then y -> 0, then 0 -> y under reflection
    const double down = (z - y) / p.mu + y / p.mu;
    const double up = s2 / (2 * p.mu * p.mu) * std::expm1(2 * p.mu * y / s2) - y / p.mu;
    EXPECT_NEAR(delayed_cycle_length(p, y, z), down + up, 1e-14);
}

TEST(Delayed, DensityIntegratesToOne) {
    auto p = reflected();
    for (auto [y, z] : {std::pair{0.5, 2.0}, std::pair{1.5, 1.7}, std::pair{0.0, 1.0}}) {
        double mass = trapezoid([&](double x) { return delayed_density(p, y, z, x); }, 0, 40, 400000);
        EXPECT_NEAR(mass, 1.0, 1e-6) << y << "," << z;
    }
}

TEST(Delayed, DensityMeanGivesHoldingCost) {
    // F~ = c_h E[X] + ordering and reflection rates
    auto p = reflected(0.4);
    const double y = 0.6, z = 2.5;
    const double mean = trapezoid([&](double x) { return x * delayed_density(p, y, z, x); }, 0, 40, 400000);
    const double L = delayed_cycle_length(p, y, z);
    const double expected = p.c_h * mean + (p.k1 + p.k2 * (z - y)) / L + p.k5 * delayed_reflection_rate(p, y, z);
    EXPECT_NEAR(delayed_policy_cost(p, y, z), expected, 1e-6);
}

TEST(Delayed, DerivativeNumeratorSign) {
    for (double k5 : {0.0, 0.4, 1.5, 4.0}) {
        auto p = reflected(k5);
        for (double y : {0.1, 0.5, 1.2})
            for (double z : {1.5, 3.0}) {
                if (z <= y) continue;
                const double h = 1e-6;
                const double fd = (delayed_policy_cost(p, y + h, z) - delayed_policy_cost(p, y - h, z)) / (2 * h);
                const double num = delayed_cost_dy_numerator(p, y, z);
                if (std::abs(fd) < 1e-6) continue;
                EXPECT_EQ(num > 0, fd > 0) << "k5=" << k5 << " y=" << y << " z=" << z;
            }
    }
}

TEST(Delayed, SufficientConditionOverGrid) {
    auto base = reflected();
    const double bound = base.k2 + std::sqrt(2 * base.k1 * base.c_h / base.mu);
    for (double k5 : {0.0, 0.5, 1.0, bound - 1e-3}) {
        auto p = reflected(k5);
        for (int i = 1; i <= 10; ++i)
            for (int j = 1; j <= 10; ++j) {
                const double y = 0.3 * i, z = y + 0.4 * j;
                auto c = delayed_beats_sS(p, y, z);
                EXPECT_TRUE(c.sufficient_all_pairs);
                EXPECT_TRUE(c.delayed_cheaper) << "k5=" << k5 << " y=" << y << " z=" << z;
                EXPECT_LT(c.F_delayed, c.F);
            }
    }
}

TEST(Delayed, ExpensiveReflectionLosesAtSomePair) {
    auto p = reflected(6.0);
    auto c = delayed_beats_sS(p, 0.5, 2.0);
    EXPECT_FALSE(c.sufficient_all_pairs);
    EXPECT_FALSE(c.delayed_cheaper);
}

TEST(Delayed, EdgeImprovementWhenReflectionCheaperThanOrders) {
    auto p = reflected(0.1);
    EXPECT_TRUE(delayed_beats_sS(p, 0.5, 2.0).edge_improvement);
    EXPECT_LT(delayed_policy_cost(p, 0.05, 2.0), delayed_policy_cost(p, 0.0, 2.0));
}

TEST(GbmRegimes, Classification) {
    GbmParams p;
    EXPECT_EQ(gbm_regime(p), GbmRegime::standard);
    p.k4 = 0;
    EXPECT_EQ(gbm_regime(p), GbmRegime::no_order_optimal);
    p = GbmParams{};
    p.k3 = 0;
    EXPECT_EQ(gbm_regime(p), GbmRegime::k3_zero_solvable);
    p.k2 = 0;
    EXPECT_EQ(gbm_regime(p), GbmRegime::no_optimum);
}

TEST(GbmClosedForm, CostMatchesGenericFormula) {
    GbmParams p;
    p.eta = 0.7;
    p.k2 = 0.4;
    auto ch = gbm_characteristics(p);
    auto c = gbm_costs(p);
    for (auto [y, z] : {std::pair{0.2, 1.0}, std::pair{0.5, 4.0}})
        EXPECT_NEAR(gbm_F(p, y, z), policy_cost(ch, c, y, z), 1e-12);
}

TEST(Params, Validation) {
    DbmParams d;
    d.mu = 0;
    EXPECT_THROW(d.validate(), std::invalid_argument);
    GbmParams g;
    g.beta = 0.5;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = GbmParams{};
    g.eta = 1.5;
    EXPECT_THROW(g.validate(), std::invalid_argument);
}
