#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/random/sobol.hpp>

#include "sspolicy/characteristics.hpp"
#include "sspolicy/costs.hpp"
#include "sspolicy/nelder_mead.hpp"
#include "sspolicy/parallel.hpp"

namespace sspolicy {

/// Long-run behaviour of the (y,z) order-up-to policy.
struct PolicyEvaluation {
    double y = 0.0, z = 0.0;
    double F = 0.0;
    double kappa = 0.0;
    double Bg0 = 0.0, Bzeta = 0.0;
    /// Stationary density; empty when no scale/speed information was supplied.
    RealFn pi;
};

/// F(y,z) = (c1 + Bg0) / Bzeta; +inf when the pair is degenerate.
inline double policy_cost(const Characteristics& ch, const CostModel& costs, double y, double z) {
    const double bz = ch.zeta(z) - ch.zeta(y);
    if (!(bz > 0)) return std::numeric_limits<double>::infinity();
    return (costs.c1(y, z) + ch.g0(z) - ch.g0(y)) / bz;
}

inline PolicyEvaluation evaluate_policy(const Characteristics& ch, const CostModel& costs, double y, double z,
                                        std::shared_ptr<const ScaleSpeed> ss = nullptr) {
    if (z >= ch.right) throw DomainError("evaluate_policy: order-up-to level at the right boundary has infinite cost");
    if (!(ch.admits(y) && y < z)) throw DomainError("evaluate_policy: need a <= y < z < b");
    PolicyEvaluation ev;
    ev.y = y;
    ev.z = z;
    ev.Bg0 = ch.g0(z) - ch.g0(y);
    ev.Bzeta = ch.zeta(z) - ch.zeta(y);
    ev.F = (costs.c1(y, z) + ev.Bg0) / ev.Bzeta;
    ev.kappa = 1.0 / ev.Bzeta;
    if (ss) {
        const double kappa = ev.kappa;
        ev.pi = [ss, y, z, kappa](double x) {
            if (x <= y || x >= ss->model().right) return 0.0;
            const double lx = ss->log_scale(x);
            const double top = std::min(x, z);
            auto f = [&](double v) { return std::exp(ss->log_scale(v) - lx); };
            double sg = ss->model().diffusion(x);
            return 2 * kappa / (sg * sg) * quad::integrate(f, y, top, quad::Options{1e-12, 12});
        };
    }
    return ev;
}

/// First-order residuals F - (-dc1/dy + g0'(y))/zeta'(y) and F - (dc1/dz + g0'(z))/zeta'(z).
inline std::pair<double, double> first_order_residuals(const Characteristics& ch, const CostModel& costs, double y,
                                                       double z, double F) {
    const double ry = F - (-costs.dc1_dy(y, z) + ch.g0_prime(y)) / ch.zeta_prime(y);
    const double rz = F - (costs.dc1_dz(y, z) + ch.g0_prime(z)) / ch.zeta_prime(z);
    return {ry, rz};
}

inline std::pair<double, double> first_order_residuals(const Characteristics& ch, const CostModel& costs, double y,
                                                       double z) {
    return first_order_residuals(ch, costs, y, z, policy_cost(ch, costs, y, z));
}

/// d2c1/dy2 - g0''(y) + F zeta''(y); nonnegative at an interior minimiser.
inline double second_order_value(const Characteristics& ch, const CostModel& costs, double y, double z, double F) {
    return costs.d2c1_dy2(y, z) - ch.g0_second(y) + F * ch.zeta_second(y);
}

/// Gradient of F in (y,z).
inline std::array<double, 2> policy_cost_gradient(const Characteristics& ch, const CostModel& costs, double y,
                                                  double z) {
    const double bz = ch.zeta(z) - ch.zeta(y);
    const double F = policy_cost(ch, costs, y, z);
    return {(costs.dc1_dy(y, z) - ch.g0_prime(y) + F * ch.zeta_prime(y)) / bz,
            (costs.dc1_dz(y, z) + ch.g0_prime(z) - F * ch.zeta_prime(z)) / bz};
}

struct SearchConfig {
    int starts = 16;
    NelderMeadOptions nm{};
    /// Search box half width around the anchor, in domain-map units.
    double box_half_width = 12.0;
    /// Region (domain-map units) from which multistart points are drawn.
    double start_half_width = 4.0;
    double min_gap = 1e-9;
    double boundary_proximity = 1e-6;
    double improvement = 0.01;
    /// Probes (each 5 units further out) along an escaping ray.
    int ray_steps = 4;
    bool polish = true;
    int threads = 1;
    /// Length scale for the domain map.
    double scale = 1.0;
};

struct StartTrace {
    double u0 = 0, w0 = 0;
    double y = 0, z = 0, F = 0;
    int iterations = 0;
    bool converged = false;
};

struct SolveReport {
    enum class Verdict { minimizer, no_minimizer };

    Verdict verdict = Verdict::minimizer;
    double yStar = 0, zStar = 0, FStar = 0;
    bool boundaryCase = false;
    std::pair<double, double> focResidual{0, 0};
    /// Only computed for interior y*.
    double socValue = std::numeric_limits<double>::quiet_NaN();
    bool socComputed = false;
    /// At y* = a: F* - (-dc1/dy + g0'(a))/zeta'(a), which must be >= 0.
    double edgeSlack = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    long evaluations = 0;
    /// Smallest F seen over every probe evaluated during the search.
    double bestProbeF = std::numeric_limits<double>::infinity();
    /// For the no-minimizer verdict: extrapolated limit of F along the escaping ray.
    double infimumEstimate = std::numeric_limits<double>::quiet_NaN();
    std::string boundaryEscape;
    std::vector<StartTrace> trace;
    std::vector<std::pair<double, double>> rayProbe;
    std::string message;

    bool found() const { return verdict == Verdict::minimizer; }
};

namespace detail {

struct Incumbent {
    double y = 0, z = 0, F = std::numeric_limits<double>::infinity();
    long evals = 0;
    void offer(double yy, double zz, double f) {
        ++evals;
        if (f < F || (f == F && zz < z)) {
            y = yy;
            z = zz;
            F = f;
        }
    }
};

inline bool newton_polish(const Characteristics& ch, const CostModel& costs, const DomainMap& map, Incumbent& inc) {
    double y = inc.y, z = inc.z;
    bool moved = false;
    for (int it = 0; it < 30; ++it) {
        auto g = policy_cost_gradient(ch, costs, y, z);
        if (!std::isfinite(g[0]) || !std::isfinite(g[1])) break;
        const double hy = 1e-5 * map.jacobian(map.to_u(y)), hz = 1e-5 * map.jacobian(map.to_u(z));
        if (!(y - hy > ch.left && z - hz > y + hy)) break;
        auto gyp = policy_cost_gradient(ch, costs, y + hy, z), gym = policy_cost_gradient(ch, costs, y - hy, z);
        auto gzp = policy_cost_gradient(ch, costs, y, z + hz), gzm = policy_cost_gradient(ch, costs, y, z - hz);
        double a = (gyp[0] - gym[0]) / (2 * hy), b = 0.5 * ((gzp[0] - gzm[0]) / (2 * hz) + (gyp[1] - gym[1]) / (2 * hy)),
               d = (gzp[1] - gzm[1]) / (2 * hz);
        double det = a * d - b * b;
        if (!(det > 0) || !(a > 0)) break;
        double dy = -(d * g[0] - b * g[1]) / det, dz = -(a * g[1] - b * g[0]) / det;
        double F0 = policy_cost(ch, costs, y, z);
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
            double yn = y + t * dy, zn = z + t * dz;
            if (!(ch.admits(yn) && yn > ch.left && zn > yn && zn < ch.right)) continue;
            double Fn = policy_cost(ch, costs, yn, zn);
            inc.offer(yn, zn, Fn);
            if (Fn <= F0 + 1e-15 * std::abs(F0)) {
                auto gn = policy_cost_gradient(ch, costs, yn, zn);
                if (std::hypot(gn[0], gn[1]) <= std::hypot(g[0], g[1]) || Fn < F0) {
                    y = yn;
                    z = zn;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) break;
        moved = true;
        if (std::abs(t * dy) <= 1e-15 * (1 + std::abs(y)) && std::abs(t * dz) <= 1e-15 * (1 + std::abs(z))) break;
    }
    if (moved) {
        // F is flat to rounding here; prefer the stationary point over the lowest sample
        const double Fp = policy_cost(ch, costs, y, z);
        if (Fp <= inc.F + 1e-14 * std::abs(inc.F)) {
            inc.y = y;
            inc.z = z;
            inc.F = Fp;
        }
    }
    return moved;
}

/// Minimises F(a, z) over z for an attainable left boundary a.
inline Incumbent edge_search(const Characteristics& ch, const CostModel& costs, const DomainMap& map, double uc,
                             double half_width) {
    Incumbent inc;
    const double a = ch.left;
    auto phi = [&](double t) {
        double z = map.to_x(t);
        if (!(z > a && z < ch.right)) return std::numeric_limits<double>::infinity();
        double f = policy_cost(ch, costs, a, z);
        if (!std::isfinite(f)) f = std::numeric_limits<double>::infinity();
        inc.offer(a, z, f);
        return f;
    };
    const int n = 400;
    double best_t = uc, best_f = std::numeric_limits<double>::infinity();
    const double lo = uc - half_width, hi = uc + half_width, h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
        double t = lo + h * i, f = phi(t);
        if (f < best_f) {
            best_f = f;
            best_t = t;
        }
    }
    if (std::isfinite(best_f)) {
        boost::uintmax_t iters = 200;
        boost::math::tools::brent_find_minima(phi, best_t - h, best_t + h, 52, iters);
        // Newton on dF/dz = 0 for the last digits
        double z = inc.z;
        for (int it = 0; it < 20; ++it) {
            double hz = 1e-5 * map.jacobian(map.to_u(z));
            auto g = policy_cost_gradient(ch, costs, a, z)[1];
            double gp = (policy_cost_gradient(ch, costs, a, z + hz)[1] - policy_cost_gradient(ch, costs, a, z - hz)[1]) /
                        (2 * hz);
            if (!(gp > 0)) break;
            double zn = z - g / gp;
            if (!(zn > a && zn < ch.right)) break;
            double fn = policy_cost(ch, costs, a, zn);
            inc.offer(a, zn, fn);
            if (fn > inc.F + 1e-14 * std::abs(inc.F)) break;
            const bool done = std::abs(zn - z) <= 1e-15 * (1 + std::abs(z));
            z = zn;
            if (done) break;
        }
        const double fz = policy_cost(ch, costs, a, z);
        if (fz <= inc.F + 1e-14 * std::abs(inc.F)) {
            inc.z = z;
            inc.F = fz;
        }
    }
    return inc;
}

}  // namespace detail

/// Global minimisation of F over {a <= y < z < b} by multistart simplex
/// descent in (u, log gap) coordinates, an edge search along y = a when a is
/// attainable, and a Newton polish of the first-order conditions.
inline SolveReport minimize_F(const Characteristics& ch, const CostModel& costs, const SearchConfig& cfg = {}) {
    SolveReport rep;
    const DomainMap map(ch.left, ch.right, cfg.scale);
    const double uc = map.to_u(ch.anchor);
    const double lo_u = uc - cfg.box_half_width, hi_u = uc + cfg.box_half_width;
    const double lo_w = std::log(cfg.min_gap), hi_w = std::log(2 * cfg.box_half_width);

    // deterministic low-discrepancy starts
    std::vector<std::array<double, 2>> starts;
    boost::random::sobol qrng(2);
    const double span = static_cast<double>(qrng.max() - qrng.min()) + 1.0;
    for (int i = 0; i < cfg.starts; ++i) {
        double r0 = static_cast<double>(qrng() - qrng.min()) / span;
        double r1 = static_cast<double>(qrng() - qrng.min()) / span;
        starts.push_back({uc - cfg.start_half_width + 2 * cfg.start_half_width * r0, std::log(0.05) + r1 * std::log(120.0)});
    }

    std::vector<detail::Incumbent> incs(starts.size());
    rep.trace.resize(starts.size());
    parallel_for(static_cast<int>(starts.size()), cfg.threads, [&](int i) {
        detail::Incumbent& inc = incs[i];
        auto phi = [&](const std::array<double, 2>& p) {
            if (p[0] < lo_u || p[0] > hi_u || p[1] < lo_w || p[1] > hi_w || p[0] + std::exp(p[1]) > hi_u)
                return std::numeric_limits<double>::infinity();
            double y = map.to_x(p[0]), z = map.to_x(p[0] + std::exp(p[1]));
            if (!(y > ch.left && z > y && z < ch.right)) return std::numeric_limits<double>::infinity();
            double f = policy_cost(ch, costs, y, z);
            if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
            inc.offer(y, z, f);
            return f;
        };
        auto r = nelder_mead_2d(phi, starts[i], cfg.nm);
        StartTrace& t = rep.trace[i];
        t.u0 = starts[i][0];
        t.w0 = starts[i][1];
        t.y = map.to_x(r.x[0]);
        t.z = map.to_x(r.x[0] + std::exp(r.x[1]));
        t.F = r.f;
        t.iterations = r.iterations;
        t.converged = r.converged;
    });

    detail::Incumbent best;
    for (size_t i = 0; i < incs.size(); ++i) {
        best.evals += incs[i].evals;
        rep.iterations += rep.trace[i].iterations;
        if (incs[i].F < best.F || (incs[i].F == best.F && incs[i].z < best.z)) {
            best.y = incs[i].y;
            best.z = incs[i].z;
            best.F = incs[i].F;
        }
    }

    if (ch.leftAttainable && std::isfinite(ch.left)) {
        auto edge = detail::edge_search(ch, costs, map, uc, cfg.box_half_width);
        best.evals += edge.evals;
        if (edge.F <= best.F + 1e-12 * (1 + std::abs(best.F))) {
            best.y = edge.y;
            best.z = edge.z;
            best.F = edge.F;
            rep.boundaryCase = true;
        }
    }

    if (!std::isfinite(best.F)) {
        rep.verdict = SolveReport::Verdict::no_minimizer;
        rep.message = "F is not finite at any probe";
        rep.evaluations = best.evals;
        return rep;
    }

    // boundary escape detection
    const double ub = map.to_u(best.y), ubz = map.to_u(best.z);
    const bool near_left = !ch.leftAttainable &&
                           (map.left_proximity(best.y) < cfg.boundary_proximity || ub <= lo_u + 0.5);
    const bool near_right = map.right_proximity(best.z) < cfg.boundary_proximity || ubz >= hi_u - 0.5;
    auto probe_ray = [&](bool left) {
        std::vector<std::pair<double, double>> pts;  // (1/Bzeta, F)
        double prevF = best.F;
        bool improving = false;
        for (int k = 1; k <= cfg.ray_steps; ++k) {
            double y = left ? map.to_x(ub - 5.0 * k) : best.y;
            double z = left ? best.z : map.to_x(ubz + 5.0 * k);
            if (!(y > ch.left && z < ch.right && z > y)) break;
            double bz = ch.zeta(z) - ch.zeta(y);
            double f = policy_cost(ch, costs, y, z);
            if (!std::isfinite(f) || !(bz > 0) || !std::isfinite(bz)) break;
            if (k == 1) improving = f < best.F * (1 - cfg.improvement);
            pts.emplace_back(1.0 / bz, f);
            rep.rayProbe.emplace_back(left ? y : z, f);
            prevF = f;
        }
        (void)prevF;
        if (improving && pts.size() >= 2) {
            auto [t1, f1] = pts[pts.size() - 2];
            auto [t2, f2] = pts.back();
            rep.infimumEstimate = t1 == t2 ? f2 : f2 - (f2 - f1) / (t2 - t1) * t2;
        }
        return improving;
    };
    if (near_left && probe_ray(true)) {
        rep.verdict = SolveReport::Verdict::no_minimizer;
        rep.boundaryEscape = "left";
    } else if (near_right && probe_ray(false)) {
        rep.verdict = SolveReport::Verdict::no_minimizer;
        rep.boundaryEscape = "right";
    }

    if (rep.verdict == SolveReport::Verdict::minimizer && cfg.polish) {
        if (rep.boundaryCase) {
            // the edge search already polished dF/dz
        } else {
            detail::newton_polish(ch, costs, map, best);
        }
    }

    rep.yStar = best.y;
    rep.zStar = best.z;
    rep.FStar = best.F;
    rep.bestProbeF = best.F;
    rep.evaluations = best.evals;

    if (rep.verdict == SolveReport::Verdict::no_minimizer) {
        std::ostringstream os;
        os << "no minimizer: F keeps decreasing as " << (rep.boundaryEscape == "left" ? "y" : "z")
           << " approaches the " << rep.boundaryEscape << " boundary; infimum estimate " << rep.infimumEstimate;
        rep.message = os.str();
        return rep;
    }
    auto foc = first_order_residuals(ch, costs, rep.yStar, rep.zStar, rep.FStar);
    rep.focResidual = foc;
    if (rep.boundaryCase) {
        rep.edgeSlack = foc.first;
        rep.focResidual.first = 0.0;
    } else {
        rep.socValue = second_order_value(ch, costs, rep.yStar, rep.zStar, rep.FStar);
        rep.socComputed = true;
    }
    rep.message = "minimizer found";
    return rep;
}

}  // namespace sspolicy
