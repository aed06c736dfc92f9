#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "sspolicy/costs.hpp"
#include "sspolicy/diffusion.hpp"
#include "sspolicy/domain_map.hpp"
#include "sspolicy/models.hpp"
#include "sspolicy/parallel.hpp"
#include "sspolicy/quadrature.hpp"
#include "sspolicy/rng.hpp"
#include "sspolicy/solver.hpp"

namespace sspolicy {

// ------------------------------------------------------------------ policies

struct OrderUpTo {
    double y = 0, z = 1;
};

/// After each order, wait for X to reach `trigger`; then order up to `target`
/// when X rises back to `reorder`.
struct DelayedTrigger {
    double trigger = 0, reorder = 0, target = 1;
};

/// Reflection at the left boundary, no orders.
struct JustInTime {};

struct PathSummary {
    double t = 0;
    double x = 0;
    long orders = 0;
    double lastOrderTime = -1;
    double localTime = 0;
};

/// Called at every grid time; returning a level above x orders up to it.
struct Custom {
    std::function<std::optional<double>(double t, double x, const PathSummary&)> decide;
    std::string name = "custom";
};

using PolicySpec = std::variant<OrderUpTo, DelayedTrigger, JustInTime, Custom>;

inline std::string policy_name(const PolicySpec& p) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, OrderUpTo>) return "order_up_to";
            else if constexpr (std::is_same_v<T, DelayedTrigger>) return "delayed_trigger";
            else if constexpr (std::is_same_v<T, JustInTime>) return "just_in_time";
            else return v.name;
        },
        p);
}

inline void validate_policy(const PolicySpec& p, const DiffusionModel& model) {
    auto inside = [&](double x) { return x >= model.left && x < model.right; };
    if (auto* o = std::get_if<OrderUpTo>(&p)) {
        if (!(o->y < o->z)) throw DomainError("OrderUpTo: need y < z");
        if (!inside(o->y) || !model.interior(o->z)) throw DomainError("OrderUpTo: levels outside the state space");
        if (o->y == model.left && !model.reflecting_left)
            throw DomainError("OrderUpTo: y at a non-reflecting boundary is never reached");
    } else if (auto* d = std::get_if<DelayedTrigger>(&p)) {
        if (!(d->trigger <= d->reorder && d->reorder < d->target))
            throw DomainError("DelayedTrigger: need trigger <= reorder < target");
        if (!inside(d->trigger) || !model.interior(d->target))
            throw DomainError("DelayedTrigger: levels outside the state space");
    } else if (std::holds_alternative<JustInTime>(p)) {
        if (!model.reflecting_left) throw DomainError("JustInTime: the model has no reflecting boundary");
    } else if (!std::get<Custom>(p).decide) {
        throw DomainError("Custom: missing decision callback");
    }
}

// ------------------------------------------------------------ configuration

struct SimulationConfig {
    std::uint64_t seed = 20240917;
    double dt = 1e-3;
    double horizon = 2000;
    int paths = 64;
    /// Fraction of the horizon discarded before any cost or occupancy is recorded.
    double burn_in = 0.1;
    int threads = 0;
    /// Start level; NaN picks the policy target (or the model anchor).
    double x0 = std::numeric_limits<double>::quiet_NaN();
    int hist_bins = 200;
    /// Histogram range; NaN picks a range from the policy and the domain map.
    double hist_lo = std::numeric_limits<double>::quiet_NaN();
    double hist_hi = std::numeric_limits<double>::quiet_NaN();
    /// Record (t, x) of path 0 every `sample_stride` steps; 0 disables.
    long sample_stride = 0;
    double safety_bound = 1e12;
    /// Force Euler-Maruyama even for the builtin models.
    bool force_euler = false;
};

struct Estimate {
    double mean = 0;
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
};

inline Estimate estimate(const std::vector<double>& v) {
    Estimate e;
    if (v.empty()) {
        e.mean = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double s = 0;
    for (double x : v) s += x;
    e.mean = s / v.size();
    if (v.size() > 1) {
        double q = 0;
        for (double x : v) q += (x - e.mean) * (x - e.mean);
        e.stderr_ = std::sqrt(q / (v.size() - 1) / v.size());
    }
    return e;
}

/// Time-weighted occupancy counts on bins with the given edges.
struct OccupancyHistogram {
    std::vector<double> edges;
    std::vector<std::uint64_t> counts;
    std::uint64_t underflow = 0, overflow = 0;

    std::uint64_t total() const {
        std::uint64_t t = underflow + overflow;
        for (auto c : counts) t += c;
        return t;
    }
    /// Empirical CDF at edges[i].
    double cdf(size_t i) const {
        const double tot = static_cast<double>(total());
        std::uint64_t below = underflow;
        for (size_t j = 0; j < i && j < counts.size(); ++j) below += counts[j];
        return tot > 0 ? below / tot : 0.0;
    }
};

struct CycleStats {
    long count = 0;
    double meanLength = std::numeric_limits<double>::quiet_NaN();
    double meanCost = std::numeric_limits<double>::quiet_NaN();
    /// Total cycle cost over total cycle length.
    double renewalCost = std::numeric_limits<double>::quiet_NaN();
};

struct SimulationResult {
    std::string policy;
    std::string scheme;
    Estimate avgCost, holding, ordering, reflection, orderFrequency, localTimeRate;
    OccupancyHistogram histogram;
    CycleStats cycles;
    std::uint64_t seed = 0;
    double dt = 0, horizon = 0, burnIn = 0;
    int paths = 0;
    int abortedPaths = 0;
    std::vector<double> pathCosts;
    std::vector<std::pair<double, double>> pathSample;
};

namespace detail {

enum class StepKind { additive, geometric, euler };

/// Works in w = x (additive, euler) or w = ln x (geometric); in both builtin
/// cases w is a Brownian motion with constant drift, so a step is exact.
struct Stepper {
    StepKind kind = StepKind::euler;
    double a = 0, s = 0;
    const DiffusionModel* model = nullptr;

    double to_w(double x) const { return kind == StepKind::geometric ? std::log(x) : x; }
    double to_x(double w) const { return kind == StepKind::geometric ? std::exp(w) : w; }
    double drift(double w) const { return kind == StepKind::euler ? model->drift(w) : a; }
    double sigma(double w) const { return kind == StepKind::euler ? model->diffusion(w) : s; }
    const char* name() const {
        switch (kind) {
        case StepKind::additive: return "exact_additive";
        case StepKind::geometric: return "exact_log";
        default: return "euler_maruyama";
        }
    }
};

inline Stepper make_stepper(const DiffusionModel& model, bool force_euler) {
    Stepper st;
    st.model = &model;
    if (force_euler) return st;
    if (model.name == "dbm" || model.name == "reflected_dbm") {
        st.kind = StepKind::additive;
        st.a = model.drift(1.0);
        st.s = model.diffusion(1.0);
    } else if (model.name == "gbm") {
        st.kind = StepKind::geometric;
        const double mu = model.drift(1.0), sg = model.diffusion(1.0);
        st.a = mu - 0.5 * sg * sg;
        st.s = sg;
    }
    return st;
}

/// Minimum of a Brownian bridge from w0 to w1 over a step of variance v.
inline double bridge_min(double w0, double w1, double v, double u) {
    const double d = w1 - w0;
    return 0.5 * (w0 + w1 - std::sqrt(d * d - 2 * v * std::log(u)));
}

inline double bridge_max(double w0, double w1, double v, double u) {
    const double d = w1 - w0;
    return 0.5 * (w0 + w1 + std::sqrt(d * d - 2 * v * std::log(u)));
}

struct PathOutcome {
    double holding = 0, ordering = 0, reflection = 0, localTime = 0;
    long orders = 0;
    double cycleLength = 0, cycleCost = 0;
    long cycles = 0;
    std::vector<std::uint64_t> hist;
    std::uint64_t under = 0, over = 0;
    double measured = 0;
    bool aborted = false;
    std::vector<std::pair<double, double>> sample;
};

inline double default_start(const PolicySpec& p, const DiffusionModel& model) {
    if (auto* o = std::get_if<OrderUpTo>(&p)) return o->z;
    if (auto* d = std::get_if<DelayedTrigger>(&p)) return d->target;
    if (model.reflecting_left) return model.left;
    return model.anchor;
}

/// Histogram range in x for a policy.
inline std::pair<double, double> default_range(const PolicySpec& p, const DiffusionModel& model) {
    const DomainMap map = model.domain_map();
    double lo = std::numeric_limits<double>::quiet_NaN(), top = model.anchor;
    if (auto* o = std::get_if<OrderUpTo>(&p)) {
        lo = o->y;
        top = std::max(top, o->z);
    } else if (auto* d = std::get_if<DelayedTrigger>(&p)) {
        if (model.reflecting_left) lo = model.left;
        else lo = map.to_x(map.to_u(d->trigger) - 6.0);
        top = std::max(top, d->target);
    } else if (model.reflecting_left) {
        lo = model.left;
    } else {
        lo = map.to_x(map.to_u(model.anchor) - 8.0);
    }
    return {lo, map.to_x(map.to_u(top) + 6.0)};
}

}  // namespace detail

/// Simulates N independent controlled paths and returns time-average and
/// renewal-reward estimates. Builtin models are stepped exactly (in ln x for
/// gBM); other models use Euler-Maruyama. Level crossings between grid times
/// are detected with the Brownian-bridge law, and reflection at a regular left
/// boundary adds the bridge undershoot to the local time.
inline SimulationResult simulate(const DiffusionModel& model, const CostModel& costs, const PolicySpec& policy,
                                 const SimulationConfig& cfg) {
    if (!(cfg.dt > 0 && cfg.horizon > 0 && cfg.paths > 0)) throw DomainError("simulate: need dt, horizon, paths > 0");
    if (!(cfg.burn_in >= 0 && cfg.burn_in < 1)) throw DomainError("simulate: burn_in must lie in [0,1)");
    if (cfg.hist_bins < 1) throw DomainError("simulate: hist_bins must be positive");
    validate_policy(policy, model);
    PolicySpec pol = policy;
    if (auto* d = std::get_if<DelayedTrigger>(&pol); d && d->reorder == d->trigger) pol = OrderUpTo{d->trigger, d->target};

    const detail::Stepper st = detail::make_stepper(model, cfg.force_euler);
    const double x0 = std::isnan(cfg.x0) ? detail::default_start(pol, model) : cfg.x0;
    if (!(x0 >= model.left && x0 < model.right) || (x0 == model.left && !model.reflecting_left))
        throw DomainError("simulate: x0 outside the state space");
    if (st.kind == detail::StepKind::geometric && !(x0 > 0)) throw DomainError("simulate: x0 must be positive");

    auto [rlo, rhi] = detail::default_range(pol, model);
    if (!std::isnan(cfg.hist_lo)) rlo = cfg.hist_lo;
    if (!std::isnan(cfg.hist_hi)) rhi = cfg.hist_hi;
    if (st.kind == detail::StepKind::geometric && !(rlo > 0)) rlo = model.domain_map().to_x(std::log(rhi) - 12.0);
    if (!(rlo < rhi)) throw DomainError("simulate: empty histogram range");
    const double wlo = st.to_w(rlo), whi = st.to_w(rhi);
    const int bins = cfg.hist_bins;
    const double dw = (whi - wlo) / bins;

    const long steps = std::max(1L, std::lround(cfg.horizon / cfg.dt));
    const long burn = std::lround(cfg.burn_in * steps);
    const double dt = cfg.dt, sqdt = std::sqrt(dt);
    const double leftw = model.reflecting_left ? st.to_w(model.left) : -std::numeric_limits<double>::infinity();

    std::vector<detail::PathOutcome> out(cfg.paths);
    auto run = [&](int path) {
        detail::PathOutcome& o = out[path];
        o.hist.assign(bins, 0);
        auto gz = make_stream(cfg.seed, static_cast<std::uint64_t>(path), 0);
        auto gu = make_stream(cfg.seed, static_cast<std::uint64_t>(path), 1);
        Normal normal;
        double w = st.to_w(x0);
        bool armed = false;
        double cycleStart = -1, cycleCost = 0;
        PathSummary summary;
        summary.x = x0;

        auto place = [&](double pre, double post, double t, bool measuring) {
            const double c = costs.c1(pre, post);
            ++summary.orders;
            summary.lastOrderTime = t;
            if (!measuring) return;
            o.ordering += c;
            ++o.orders;
            if (cycleStart >= 0) {
                ++o.cycles;
                o.cycleLength += t - cycleStart;
                o.cycleCost += cycleCost;
            }
            cycleStart = t;
            cycleCost = c;
        };

        for (long k = 0; k < steps; ++k) {
            const double t = k * dt;
            const bool measuring = k >= burn;
            double x = st.to_x(w);
            if (auto* cu = std::get_if<Custom>(&pol)) {
                summary.t = t;
                summary.x = x;
                if (auto target = cu->decide(t, x, summary); target && *target > x) {
                    if (!model.interior(*target)) throw DomainError("Custom: target outside the state space");
                    place(x, *target, t, measuring);
                    x = *target;
                    w = st.to_w(x);
                }
            }
            if (measuring) {
                const double h = costs.c0(x) * dt;
                o.holding += h;
                cycleCost += h;
                const double b = std::floor((w - wlo) / dw);
                if (b < 0) ++o.under;
                else if (b >= bins) ++o.over;
                else ++o.hist[static_cast<size_t>(b)];
            }
            if (path == 0 && cfg.sample_stride > 0 && k % cfg.sample_stride == 0) o.sample.emplace_back(t, x);

            const double w0 = w, sg = st.sigma(w0), v = sg * sg * dt;
            double w1 = w0 + st.drift(w0) * dt + sg * sqdt * normal(gz);
            const double reach = 10.0 * sg * sqdt;
            double mn = std::numeric_limits<double>::quiet_NaN();
            auto minimum = [&](double level) {
                if (std::min(w0, w1) <= level) return true;
                if (std::min(w0, w1) - level > reach) return false;
                if (std::isnan(mn)) mn = detail::bridge_min(w0, w1, v, open_uniform(gu));
                return mn <= level;
            };
            const double te = t + dt;

            if (auto* ou = std::get_if<OrderUpTo>(&pol)) {
                const double yw = st.to_w(ou->y), jump = st.to_w(ou->z) - yw;
                if (minimum(yw)) {
                    do {
                        place(ou->y, ou->z, te, measuring);
                        w1 += jump;
                    } while (w1 <= yw);
                    mn = std::numeric_limits<double>::quiet_NaN();
                }
            } else if (auto* dl = std::get_if<DelayedTrigger>(&pol)) {
                if (!armed && minimum(st.to_w(dl->trigger))) armed = true;
            }

            if (model.reflecting_left && minimum(leftw)) {
                if (std::isnan(mn)) mn = detail::bridge_min(w0, w1, v, open_uniform(gu));
                const double m = std::min(mn, w1);
                if (m < leftw) {
                    const double l = leftw - m;
                    w1 += l;
                    summary.localTime += l;
                    if (measuring) {
                        o.localTime += l;
                        o.reflection += costs.k5 * l;
                        cycleCost += costs.k5 * l;
                    }
                }
                if (auto* dl = std::get_if<DelayedTrigger>(&pol); dl && dl->trigger <= model.left) armed = true;
            }

            if (auto* dl = std::get_if<DelayedTrigger>(&pol); dl && armed) {
                const double sw = st.to_w(dl->reorder);
                bool up = w1 >= sw;
                if (!up && sw - std::max(w0, w1) <= reach && w0 < sw)
                    up = detail::bridge_max(w0, w1, v, open_uniform(gu)) >= sw;
                if (up) {
                    place(dl->reorder, dl->target, te, measuring);
                    w1 += st.to_w(dl->target) - sw;
                    armed = false;
                }
            }

            w = w1;
            const double xn = st.to_x(w);
            if (!std::isfinite(w) || !std::isfinite(xn) || std::abs(xn) > cfg.safety_bound) {
                o.aborted = true;
                break;
            }
        }
        o.measured = (steps - burn) * dt;
    };
    parallel_for(cfg.paths, resolve_threads(cfg.threads), run);

    SimulationResult r;
    r.policy = policy_name(policy);
    r.scheme = st.name();
    r.seed = cfg.seed;
    r.dt = dt;
    r.horizon = steps * dt;
    r.burnIn = burn * dt;
    r.paths = cfg.paths;
    r.histogram.counts.assign(bins, 0);
    for (int i = 0; i <= bins; ++i) r.histogram.edges.push_back(st.to_x(wlo + dw * i));
    std::vector<double> total, hold, ord, refl, freq, lt;
    double cl = 0, cc = 0;
    for (const auto& o : out) {
        if (o.aborted) {
            ++r.abortedPaths;
            continue;
        }
        const double T = o.measured;
        total.push_back((o.holding + o.ordering + o.reflection) / T);
        hold.push_back(o.holding / T);
        ord.push_back(o.ordering / T);
        refl.push_back(o.reflection / T);
        freq.push_back(o.orders / T);
        lt.push_back(o.localTime / T);
        for (int b = 0; b < bins; ++b) r.histogram.counts[b] += o.hist[b];
        r.histogram.underflow += o.under;
        r.histogram.overflow += o.over;
        r.cycles.count += o.cycles;
        cl += o.cycleLength;
        cc += o.cycleCost;
    }
    r.pathCosts = total;
    r.avgCost = estimate(total);
    r.holding = estimate(hold);
    r.ordering = estimate(ord);
    r.reflection = estimate(refl);
    r.orderFrequency = estimate(freq);
    r.localTimeRate = estimate(lt);
    if (r.cycles.count > 0) {
        r.cycles.meanLength = cl / r.cycles.count;
        r.cycles.meanCost = cc / r.cycles.count;
        r.cycles.renewalCost = cc / cl;
    }
    r.pathSample = std::move(out[0].sample);
    return r;
}

/// Analytic stationary CDF at each histogram edge, from a density supported
/// on [lower, b).
inline std::vector<double> analytic_cdf(const OccupancyHistogram& h, const RealFn& density, double lower) {
    std::vector<double> cdf(h.edges.size(), 0.0);
    double acc = 0, prev = lower;
    const quad::Options opt{1e-10, 10};
    for (size_t i = 0; i < h.edges.size(); ++i) {
        const double e = h.edges[i];
        if (e > prev) {
            acc += quad::integrate(density, prev, e, opt);
            prev = e;
        }
        cdf[i] = acc;
    }
    return cdf;
}

/// Sup distance between the empirical occupancy CDF and the CDF of `density`,
/// taken over the histogram edges.
inline double stationary_check(const SimulationResult& r, const RealFn& density, double lower) {
    const auto cdf = analytic_cdf(r.histogram, density, lower);
    double d = 0;
    for (size_t i = 0; i < cdf.size(); ++i) d = std::max(d, std::abs(r.histogram.cdf(i) - cdf[i]));
    return d;
}

inline double stationary_check(const SimulationResult& r, const PolicyEvaluation& ev) {
    if (!ev.pi) throw DomainError("stationary_check: the evaluation carries no stationary density");
    return stationary_check(r, ev.pi, ev.y);
}

// ------------------------------------------------------------- first passage

struct FirstPassageEstimate {
    Estimate time, cost;
    int censored = 0;
};

/// Monte Carlo E_z[tau_y] and E_z[int_0^tau_y c0(X) dt] for y < z.
inline FirstPassageEstimate simulate_first_passage(const DiffusionModel& model, const CostModel& costs, double z,
                                                   double y, const SimulationConfig& cfg) {
    if (!(y < z)) throw DomainError("simulate_first_passage: need y < z");
    const detail::Stepper st = detail::make_stepper(model, cfg.force_euler);
    const long steps = std::max(1L, std::lround(cfg.horizon / cfg.dt));
    const double dt = cfg.dt, sqdt = std::sqrt(dt), yw = st.to_w(y);
    std::vector<double> tau(cfg.paths, 0.0), cost(cfg.paths, 0.0);
    std::vector<char> hit(cfg.paths, 0);
    parallel_for(cfg.paths, resolve_threads(cfg.threads), [&](int path) {
        auto gz = make_stream(cfg.seed, static_cast<std::uint64_t>(path), 0);
        auto gu = make_stream(cfg.seed, static_cast<std::uint64_t>(path), 1);
        Normal normal;
        double w = st.to_w(z), c = 0;
        for (long k = 0; k < steps; ++k) {
            const double sg = st.sigma(w), v = sg * sg * dt;
            const double w1 = w + st.drift(w) * dt + sg * sqdt * normal(gz);
            bool crossed = w1 <= yw;
            if (!crossed && std::min(w, w1) - yw <= 10 * sg * sqdt)
                crossed = detail::bridge_min(w, w1, v, open_uniform(gu)) <= yw;
            if (crossed) {
                // the hitting time inside the step is taken at its midpoint
                c += costs.c0(st.to_x(w)) * 0.5 * dt;
                tau[path] = (k + 0.5) * dt;
                hit[path] = 1;
                break;
            }
            c += 0.5 * (costs.c0(st.to_x(w)) + costs.c0(st.to_x(w1))) * dt;
            w = w1;
        }
        cost[path] = c;
    });
    FirstPassageEstimate e;
    std::vector<double> ts, cs;
    for (int i = 0; i < cfg.paths; ++i) {
        if (!hit[i]) {
            ++e.censored;
            continue;
        }
        ts.push_back(tau[i]);
        cs.push_back(cost[i]);
    }
    e.time = estimate(ts);
    e.cost = estimate(cs);
    return e;
}

// -------------------------------------------- policy-improvement transform

/// Thresholds of the single-order improvement for gBM with
/// c0(x) = k3 x + k4 x^beta and c1(y,z) = k1 + k2 (z^eta - y^eta).
struct ImprovementThresholds {
    double y = 0, z = 0, eta = 1, k1 = 0, k2 = 0;
    int mBar = 0, mHat = 0;
    double ellBar = 0, ellHat = 0;
    /// Orders with post-order level above L^(1/eta) are transformed.
    double L = 0;

    double ell(double m) const { return std::pow(z, eta) + (k1 / k2 + std::pow(z, eta) - std::pow(y, eta)) * m; }
    double ell_hat(double m) const {
        const double ze = std::pow(z, eta), ye = std::pow(y, eta);
        return (k1 * ze / (k2 * (ze - ye)) + ze) * m;
    }
    double r(double m) const { return std::pow(y, eta) * std::pow(std::pow(z / y, eta), m - 1); }
    double level() const { return std::pow(L, 1.0 / eta); }
};

/// argmin of k3 x + k4 x^beta.
inline double gbm_holding_argmin(const GbmParams& p) {
    if (!(p.k3 > 0 && p.k4 > 0)) throw DomainError("gbm_holding_argmin: need k3, k4 > 0");
    return std::pow(-p.beta * p.k4 / p.k3, 1.0 / (1.0 - p.beta));
}

inline ImprovementThresholds improvement_thresholds(const GbmParams& p, double z) {
    ImprovementThresholds a;
    a.y = gbm_holding_argmin(p);
    if (!(z > a.y)) throw DomainError("improvement_thresholds: need z > argmin c0");
    if (!(p.k2 > 0)) throw DomainError("improvement_thresholds: need k2 > 0");
    a.z = z;
    a.eta = p.eta;
    a.k1 = p.k1;
    a.k2 = p.k2;
    // the smallest m from which the intervals [f(m), r(m)] overlap their successors
    auto first_covering = [&](auto f) {
        int last_fail = 0;
        for (int m = 1; m < 100000; ++m) {
            const double rm = a.r(m);
            if (!(rm >= f(m + 1.0))) last_fail = m;
            if (rm > 1e300 || (m > last_fail + 64 && rm > 4 * f(m + 1.0))) break;
        }
        return last_fail + 1;
    };
    a.mBar = first_covering([&](double m) { return a.ell(m); });
    a.mHat = first_covering([&](double m) { return a.ell_hat(m); });
    a.ellBar = a.ell(a.mBar);
    a.ellHat = a.ell_hat(a.mHat);
    a.L = std::max({a.ellBar, a.ellHat, std::pow(z, p.eta)});
    return a;
}

/// m_k = min{ j : post (y/z)^(j-1) <= z }.
inline int ladder_length(double post, double y, double z) {
    int j = 1;
    double v = post;
    while (v > z) {
        v *= y / z;
        ++j;
    }
    return j;
}

struct OrderPlan {
    enum class Case { a, b, c };
    Case kase = Case::a;
    /// Order placed at the original order time: the original order (a), none (b), up to z (c).
    bool orderNow = true;
    double nowTarget = 0;
    /// Number of deferred orders at hits of y, for case (c).
    int ladder = 0;
};

inline const char* to_string(OrderPlan::Case c) {
    switch (c) {
    case OrderPlan::Case::a: return "a";
    case OrderPlan::Case::b: return "b";
    default: return "c";
    }
}

/// Replacement for one order from `pre` to `post`: pass-through when
/// post <= L^(1/eta); otherwise defer, ordering up to min(z, X) at each hit
/// of y until the two inventory processes coalesce.
inline OrderPlan improve_order(double pre, double post, const ImprovementThresholds& a) {
    if (!(a.z > a.y)) throw DomainError("improve_order: need z > y");
    if (!(post > pre)) throw DomainError("improve_order: an order must raise the level");
    OrderPlan p;
    if (post <= a.level()) {
        p.nowTarget = post;
        return p;
    }
    if (pre > a.y) {
        p.kase = OrderPlan::Case::b;
        p.orderNow = false;
        p.nowTarget = pre;
        return p;
    }
    p.kase = OrderPlan::Case::c;
    p.nowTarget = a.z;
    p.ladder = ladder_length(post, a.y, a.z);
    return p;
}

struct PathwiseConfig {
    std::uint64_t seed = 20240917;
    double dt = 1e-3;
    double horizon = 20;
    int paths = 1000;
    int threads = 0;
    double x0 = 3;
    /// Pre-order levels and post-order levels of the single original order,
    /// cycled over paths.
    std::vector<double> reorder_levels{0.5, 0.8, 1.5, 2.5};
    std::vector<double> targets{5, 30, 60, 200};
};

struct PathwiseReport {
    int paths = 0;
    long comparisons = 0;
    long violations = 0;
    /// max over paths and grid times of (transformed - original) cumulative cost
    double worstGap = -std::numeric_limits<double>::infinity();
    long holdingDominanceViolations = 0;
    int caseCount[3] = {0, 0, 0};
    int unordered = 0;
    int coalesced = 0;
    int maxTransformedOrders = 0;
};

/// Simulates a gBM path with one original order (at the first hit of the
/// reorder level, up to the target) next to its improvement on the same
/// noise, and compares cumulative costs at every grid time.
inline PathwiseReport compare_pathwise(const GbmParams& gp, const ImprovementThresholds& a, const PathwiseConfig& cfg) {
    const CostModel costs = gbm_costs(gp);
    const double drift = -gp.mu - 0.5 * gp.sigma * gp.sigma, sg = gp.sigma;
    const long steps = std::max(1L, std::lround(cfg.horizon / cfg.dt));
    const double dt = cfg.dt, sqdt = std::sqrt(dt), v = sg * sg * dt, reach = 10 * sg * sqdt;
    const double yw = std::log(a.y), zy = std::log(a.z / a.y);
    if (cfg.reorder_levels.empty() || cfg.targets.empty()) throw DomainError("compare_pathwise: empty level lists");

    struct Out {
        long comparisons = 0, violations = 0, holding = 0;
        double worst = -std::numeric_limits<double>::infinity();
        int kase = -1, orders = 0;
        bool coalesced = false;
    };
    std::vector<Out> out(cfg.paths);
    parallel_for(cfg.paths, resolve_threads(cfg.threads), [&](int path) {
        Out& o = out[path];
        const size_t n1 = cfg.reorder_levels.size();
        const double s = cfg.reorder_levels[path % n1];
        const double S = cfg.targets[(path / n1) % cfg.targets.size()];
        const double sw = std::log(s), jump = std::log(S / s);
        auto gz = make_stream(cfg.seed, static_cast<std::uint64_t>(path), 0);
        auto gu = make_stream(cfg.seed, static_cast<std::uint64_t>(path), 1);
        Normal normal;
        double w = std::log(cfg.x0);
        double d = 0;  // ln(X~ / X)
        bool ordered = false;
        double orig = 0, tran = 0;
        for (long k = 0; k < steps; ++k) {
            const double x = std::exp(w), xt = std::exp(w + d);
            orig += costs.c0(x) * dt;
            tran += costs.c0(xt) * dt;
            if (d < 0 && !(xt >= a.y * (1 - 1e-12) && xt <= x)) ++o.holding;

            const double w0 = w;
            double w1 = w0 + drift * dt + sg * sqdt * normal(gz);
            double mn = std::numeric_limits<double>::quiet_NaN();
            auto below = [&](double level) {
                if (std::min(w0, w1) <= level) return true;
                if (std::min(w0, w1) - level > reach) return false;
                if (std::isnan(mn)) mn = detail::bridge_min(w0, w1, v, open_uniform(gu));
                return mn <= level;
            };
            if (!ordered && below(sw)) {
                ordered = true;
                orig += costs.c1(s, S);
                const OrderPlan plan = improve_order(s, S, a);
                o.kase = static_cast<int>(plan.kase);
                if (plan.kase == OrderPlan::Case::a) {
                    tran += costs.c1(s, S);
                    ++o.orders;
                } else if (plan.kase == OrderPlan::Case::b) {
                    d = -jump;
                } else {
                    tran += costs.c1(s, a.z);
                    ++o.orders;
                    d = std::log(a.z / S);
                }
                w1 += jump;
                if (!std::isnan(mn)) mn += jump;
            } else if (d < 0 && below(yw - d)) {
                // X~ reached y: order up to min(z, X)
                const double dn = std::min(d + zy, 0.0);
                tran += costs.c1(a.y, a.y * std::exp(dn - d));
                ++o.orders;
                d = dn;
                if (d == 0) o.coalesced = true;
            }
            w = w1;
            ++o.comparisons;
            const double gap = tran - orig;
            o.worst = std::max(o.worst, gap);
            if (gap > 1e-12 * (1 + std::abs(orig))) ++o.violations;
        }
    });
    PathwiseReport r;
    r.paths = cfg.paths;
    for (const auto& o : out) {
        r.comparisons += o.comparisons;
        r.violations += o.violations;
        r.holdingDominanceViolations += o.holding;
        r.worstGap = std::max(r.worstGap, o.worst);
        if (o.kase < 0) ++r.unordered;
        else ++r.caseCount[o.kase];
        if (o.coalesced) ++r.coalesced;
        r.maxTransformedOrders = std::max(r.maxTransformedOrders, o.orders);
    }
    return r;
}

}  // namespace sspolicy
