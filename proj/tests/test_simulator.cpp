#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "sspolicy/models.hpp"
#include "sspolicy/simulator.hpp"
#include "sspolicy/solver.hpp"

using namespace sspolicy;

namespace {

DbmParams dbm_p() {
    DbmParams p;
    p.mu = 1;
    p.sigma = std::sqrt(2.0);
    p.c_b = 1;
    p.c_h = 1;
    p.k1 = 1;
    p.k2 = 0;
    return p;
}

DbmParams reflected(double k5) {
    DbmParams p;
    p.reflected = true;
    p.k1 = 2;
    p.k2 = 0.5;
    p.k5 = k5;
    return p;
}

SimulationConfig short_run(double horizon = 400, int paths = 16) {
    SimulationConfig c;
    c.seed = 99;
    c.horizon = horizon;
    c.paths = paths;
    return c;
}

void expect_within(const Estimate& e, double target, double k = 3.0) {
    ASSERT_TRUE(std::isfinite(e.stderr_));
    EXPECT_LE(std::abs(e.mean - target), k * e.stderr_) << "mean=" << e.mean << " se=" << e.stderr_ << " target=" << target;
}

}  // namespace

TEST(Bridge, MinimumNeverAboveEndpoints) {
    for (double u : {1e-12, 0.1, 0.5, 0.999, 1.0}) {
        const double m = detail::bridge_min(0.3, -0.2, 0.01, u);
        EXPECT_LE(m, -0.2);
        const double M = detail::bridge_max(0.3, -0.2, 0.01, u);
        EXPECT_GE(M, 0.3);
    }
    EXPECT_DOUBLE_EQ(detail::bridge_min(0.3, -0.2, 0.01, 1.0), -0.2);
}

TEST(Bridge, MinimumDistribution) {
    // P(min < b) = exp(-2 (w0 - b)(w1 - b) / v) for b below both ends
    const double w0 = 0.1, w1 = 0.05, v = 0.02, b = 0.0;
    auto g = make_stream(5, 0, 1);
    int hits = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) hits += detail::bridge_min(w0, w1, v, open_uniform(g)) <= b;
    const double p = std::exp(-2 * (w0 - b) * (w1 - b) / v);
    EXPECT_NEAR(static_cast<double>(hits) / n, p, 4 * std::sqrt(p * (1 - p) / n));
}

TEST(Streams, KeyedStreamsAreReproducibleAndDistinct) {
    auto a = make_stream(1, 2, 0), b = make_stream(1, 2, 0), c = make_stream(1, 3, 0), d = make_stream(1, 2, 1);
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
    for (int i = 0; i < 1000; ++i) {
        const double u = open_uniform(a);
        EXPECT_GT(u, 0.0);
        EXPECT_LE(u, 1.0);
    }
}

TEST(Simulate, DbmOrderUpToMatchesAnalyticCost) {
    auto p = dbm_p();
    auto r = simulate(dbm_model(p), dbm_costs(p), OrderUpTo{0, 1}, short_run());
    EXPECT_EQ(r.scheme, "exact_additive");
    EXPECT_EQ(r.abortedPaths, 0);
    expect_within(r.avgCost, 2.5);
    EXPECT_NEAR(r.avgCost.mean, 2.5, 0.05);
    expect_within(r.orderFrequency, 1.0);
    expect_within(r.ordering, 1.0);
    expect_within(r.holding, 1.5);
    EXPECT_NEAR(r.holding.mean + r.ordering.mean + r.reflection.mean, r.avgCost.mean, 1e-12);
    EXPECT_EQ(r.reflection.mean, 0.0);
    EXPECT_GT(r.cycles.count, 1000);
    EXPECT_NEAR(r.cycles.meanLength, 1.0, 0.02);
    EXPECT_NEAR(r.cycles.renewalCost, 2.5, 0.05);
}

TEST(Simulate, DbmOccupancyMatchesStationaryDensity) {
    auto p = dbm_p();
    auto ss = std::make_shared<const ScaleSpeed>(dbm_model(p));
    auto ev = evaluate_policy(dbm_characteristics(p), dbm_costs(p), 0.0, 1.0, ss);
    auto r = simulate(dbm_model(p), dbm_costs(p), OrderUpTo{0, 1}, short_run());
    EXPECT_LT(stationary_check(r, ev), 0.02);
    EXPECT_EQ(r.histogram.edges.size(), r.histogram.counts.size() + 1);
    // oracle density of the (0,1) policy
    auto pi = [](double x) { return x <= 0 ? 0.0 : (x <= 1 ? -std::expm1(-x) : std::expm1(1.0) * std::exp(-x)); };
    EXPECT_LT(stationary_check(r, pi, 0.0), 0.02);
    auto wrong = evaluate_policy(dbm_characteristics(p), dbm_costs(p), 1.0, 3.0, ss);
    EXPECT_GT(stationary_check(r, wrong), 0.2);
}

TEST(Simulate, EulerSchemeAgrees) {
    auto p = dbm_p();
    auto cfg = short_run();
    cfg.force_euler = true;
    auto r = simulate(dbm_model(p), dbm_costs(p), OrderUpTo{0, 1}, cfg);
    EXPECT_EQ(r.scheme, "euler_maruyama");
    expect_within(r.avgCost, 2.5);
}

TEST(Simulate, JustInTimeReflection) {
    auto p = reflected(1.0);
    auto r = simulate(dbm_model(p), dbm_costs(p), JustInTime{}, short_run());
    expect_within(r.avgCost, jit_cost(p));
    expect_within(r.localTimeRate, p.mu);
    expect_within(r.holding, 0.5);
    EXPECT_EQ(r.orderFrequency.mean, 0.0);
    EXPECT_LT(stationary_check(r, [&](double x) { return jit_density(p, x); }, 0.0), 0.02);
}

TEST(Simulate, DelayedPolicyMatchesAnalyticCost) {
    auto p = reflected(0.1);
    const double y = 0.5, z = 2.0;
    auto r = simulate(dbm_model(p), dbm_costs(p), DelayedTrigger{0, y, z}, short_run());
    expect_within(r.avgCost, delayed_policy_cost(p, y, z));
    expect_within(r.orderFrequency, 1.0 / delayed_cycle_length(p, y, z));
    expect_within(r.localTimeRate, delayed_reflection_rate(p, y, z));
    EXPECT_LT(stationary_check(r, [&](double x) { return delayed_density(p, y, z, x); }, 0.0), 0.02);
}

TEST(Simulate, DelayedWithReorderAtTriggerIsOrderUpTo) {
    auto p = reflected(0.1);
    auto a = simulate(dbm_model(p), dbm_costs(p), DelayedTrigger{0, 0, 2}, short_run(100, 4));
    auto b = simulate(dbm_model(p), dbm_costs(p), OrderUpTo{0, 2}, short_run(100, 4));
    EXPECT_EQ(a.pathCosts, b.pathCosts);
}

TEST(Simulate, ReflectedOrderUpToAtBoundary) {
    auto p = reflected(1.0);
    auto o = reflected_dbm_optimum(p);
    auto r = simulate(dbm_model(p), dbm_costs(p), OrderUpTo{0, o.z}, short_run());
    expect_within(r.avgCost, o.F);
    EXPECT_LT(r.localTimeRate.mean, 1e-3);
}

TEST(Simulate, GbmOrderUpToMatchesAnalyticCost) {
    GbmParams p;
    auto ch = gbm_characteristics(p);
    auto c = gbm_costs(p);
    auto rep = minimize_F(ch, c);
    auto m = gbm_model(p);
    auto r = simulate(m, c, OrderUpTo{rep.yStar, rep.zStar}, short_run(200, 16));
    EXPECT_EQ(r.scheme, "exact_log");
    expect_within(r.avgCost, rep.FStar);
    auto ev = evaluate_policy(ch, c, rep.yStar, rep.zStar, std::make_shared<const ScaleSpeed>(m));
    EXPECT_LT(stationary_check(r, ev), 0.02);
}

TEST(Simulate, CustomGridPolicyIsCloseToOrderUpTo) {
    auto p = dbm_p();
    Custom pol{[](double, double x, const PathSummary&) -> std::optional<double> {
                   if (x <= 0) return 1.0;
                   return std::nullopt;
               },
               "grid_order_up_to"};
    auto r = simulate(dbm_model(p), dbm_costs(p), pol, short_run(200, 8));
    EXPECT_EQ(r.policy, "grid_order_up_to");
    EXPECT_NEAR(r.avgCost.mean, 2.5, 0.1);
}

TEST(Simulate, RunawayPathsAreAborted) {
    auto p = dbm_p();
    Custom pol{[](double, double, const PathSummary& s) -> std::optional<double> {
                   if (s.orders == 0) return 1e13;
                   return std::nullopt;
               },
               "runaway"};
    auto r = simulate(dbm_model(p), dbm_costs(p), pol, short_run(1, 3));
    EXPECT_EQ(r.abortedPaths, 3);
}

TEST(Simulate, ThreadCountDoesNotChangeOutput) {
    GbmParams p;
    auto cfg = short_run(20, 12);
    cfg.threads = 1;
    auto a = simulate(gbm_model(p), gbm_costs(p), OrderUpTo{0.2, 1.0}, cfg);
    cfg.threads = 5;
    auto b = simulate(gbm_model(p), gbm_costs(p), OrderUpTo{0.2, 1.0}, cfg);
    EXPECT_EQ(a.pathCosts, b.pathCosts);
    EXPECT_EQ(a.histogram.counts, b.histogram.counts);
    EXPECT_EQ(a.avgCost.mean, b.avgCost.mean);
    EXPECT_EQ(a.avgCost.stderr_, b.avgCost.stderr_);
}

TEST(Simulate, SeedChangesOutput) {
    auto p = dbm_p();
    auto cfg = short_run(10, 2);
    auto a = simulate(dbm_model(p), dbm_costs(p), OrderUpTo{0, 1}, cfg);
    cfg.seed += 1;
    auto b = simulate(dbm_model(p), dbm_costs(p), OrderUpTo{0, 1}, cfg);
    EXPECT_NE(a.pathCosts, b.pathCosts);
}

TEST(Simulate, InvalidInputsThrow) {
    auto p = dbm_p();
    auto m = dbm_model(p);
    auto c = dbm_costs(p);
    EXPECT_THROW(simulate(m, c, OrderUpTo{1, 0}, short_run(1, 1)), DomainError);
    EXPECT_THROW(simulate(m, c, JustInTime{}, short_run(1, 1)), DomainError);
    auto bad = short_run(1, 1);
    bad.dt = 0;
    EXPECT_THROW(simulate(m, c, OrderUpTo{0, 1}, bad), DomainError);
}

TEST(FirstPassage, GbmMatchesCharacteristics) {
    GbmParams p;
    auto ch = gbm_characteristics(p);
    SimulationConfig cfg;
    cfg.seed = 17;
    cfg.paths = 4000;
    cfg.horizon = 60;
    auto e = simulate_first_passage(gbm_model(p), gbm_costs(p), 2.0, 1.0, cfg);
    EXPECT_EQ(e.censored, 0);
    expect_within(e.time, ch.zeta(2.0) - ch.zeta(1.0));
    expect_within(e.cost, ch.g0(2.0) - ch.g0(1.0));
}

TEST(FirstPassage, DbmMatchesCharacteristics) {
    auto p = dbm_p();
    auto ch = dbm_characteristics(p);
    SimulationConfig cfg;
    cfg.seed = 23;
    cfg.paths = 4000;
    cfg.horizon = 60;
    auto e = simulate_first_passage(dbm_model(p), dbm_costs(p), 1.0, -1.0, cfg);
    expect_within(e.time, 2.0);
    expect_within(e.cost, ch.g0(1.0) - ch.g0(-1.0));
}

TEST(Improvement, ThresholdsForUnitCosts) {
    GbmParams p;
    p.k1 = p.k2 = p.k3 = p.k4 = 1;
    p.beta = -1;
    p.eta = 1;
    auto a = improvement_thresholds(p, 2.0);
    EXPECT_NEAR(a.y, 1.0, 1e-15);
    EXPECT_EQ(a.mBar, 5);
    EXPECT_EQ(a.mHat, 6);
    EXPECT_NEAR(a.ellBar, 12.0, 1e-12);
    EXPECT_NEAR(a.ellHat, 24.0, 1e-12);
    EXPECT_NEAR(a.L, 24.0, 1e-12);
    EXPECT_NEAR(a.level(), 24.0, 1e-12);
    EXPECT_NEAR(gbm_holding_argmin(p), 1.0, 1e-15);
}

TEST(Improvement, LadderLength) {
    EXPECT_EQ(ladder_length(16, 1, 2), 4);
    EXPECT_EQ(ladder_length(2, 1, 2), 1);
    EXPECT_EQ(ladder_length(30, 1, 2), 5);
}

TEST(Improvement, Cases) {
    GbmParams p;
    p.mu = 0.5;
    auto a = improvement_thresholds(p, 2.0);
    auto pa = improve_order(0.5, 10.0, a);
    EXPECT_EQ(pa.kase, OrderPlan::Case::a);
    EXPECT_TRUE(pa.orderNow);
    EXPECT_EQ(pa.nowTarget, 10.0);
    auto pb = improve_order(1.5, 30.0, a);
    EXPECT_EQ(pb.kase, OrderPlan::Case::b);
    EXPECT_FALSE(pb.orderNow);
    auto pc = improve_order(0.5, 30.0, a);
    EXPECT_EQ(pc.kase, OrderPlan::Case::c);
    EXPECT_EQ(pc.nowTarget, 2.0);
    EXPECT_EQ(pc.ladder, 5);
    EXPECT_THROW(improve_order(2.0, 1.0, a), DomainError);
    EXPECT_STREQ(to_string(OrderPlan::Case::c), "c");
}

TEST(Improvement, PathwiseCostNeverIncreases) {
    GbmParams p;
    auto a = improvement_thresholds(p, 2.0);
    PathwiseConfig cfg;
    cfg.paths = 160;
    cfg.horizon = 10;
    auto r = compare_pathwise(p, a, cfg);
    EXPECT_EQ(r.paths, 160);
    EXPECT_GT(r.comparisons, 0);
    EXPECT_EQ(r.violations, 0);
    EXPECT_LE(r.worstGap, 1e-9);
    EXPECT_EQ(r.holdingDominanceViolations, 0);
    EXPECT_GT(r.caseCount[1] + r.caseCount[2], 0);
}
