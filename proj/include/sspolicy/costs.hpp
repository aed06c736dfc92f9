#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sspolicy/diffusion.hpp"

namespace sspolicy {

/// Holding/back-order rate c0 and ordering cost c1(y,z) = k1 + H(z) - H(y).
struct CostModel {
    RealFn c0;
    double k1 = 1.0;
    RealFn H;
    /// Optional analytic H' and H''; central differences are used when empty.
    RealFn Hp;
    RealFn Hpp;
    /// Reflection cost per unit of local time (reflected models only).
    double k5 = 0.0;
    /// Named parameters (k2, k3, k4, beta, eta, c_b, c_h, ...) kept for reporting.
    std::map<std::string, double> params;
    std::string name = "custom";

    double H_prime(double x) const {
        if (Hp) return Hp(x);
        double h = fd_step(x);
        return (H(x + h) - H(x - h)) / (2 * h);
    }
    double H_second(double x) const {
        if (Hpp) return Hpp(x);
        if (Hp) {
            double h = fd_step(x);
            return (Hp(x + h) - Hp(x - h)) / (2 * h);
        }
        double h = 1e-4 * std::max(1.0, std::abs(x));
        return (H(x + h) - 2 * H(x) + H(x - h)) / (h * h);
    }

    double c1(double y, double z) const { return k1 + H(z) - H(y); }
    double dc1_dy(double y, double /*z*/) const { return -H_prime(y); }
    double dc1_dz(double /*y*/, double z) const { return H_prime(z); }
    double d2c1_dy2(double y, double /*z*/) const { return -H_second(y); }

    double param(const std::string& key, double fallback = 0.0) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

/// c1(y,z) for y <= z.
inline double ordering_cost(const CostModel& costs, double y, double z) {
    if (y > z) throw DomainError("ordering_cost: need y <= z");
    return costs.c1(y, z);
}

struct CostValidationReport {
    TriState infCompactOk = TriState::indeterminate;
    TriState limitAtAOk = TriState::indeterminate;
    TriState c0MIntegrableOk = TriState::indeterminate;
    TriState doubleIntegralDivergesOk = TriState::indeterminate;
    TriState orderingShapeOk = TriState::indeterminate;
    ExtReal c0MIntegral;
    ExtReal doubleIntegral;
    std::vector<std::string> witnesses;

    TriState overall() const {
        return tri_and(tri_and(infCompactOk, limitAtAOk),
                       tri_and(tri_and(c0MIntegrableOk, doubleIntegralDivergesOk), orderingShapeOk));
    }
};

namespace detail {

inline std::string fmt_point(const char* what, double x, double v) {
    std::ostringstream os;
    os.precision(10);
    os << what << " x=" << x << " c0=" << v;
    return os.str();
}

/// Growth of c0 toward one end of the sampled grid. `vals` is ordered from the
/// interior toward the boundary.
inline TriState growth_toward_end(const std::vector<double>& vals, double interior_min) {
    const int n = static_cast<int>(vals.size());
    const int tail = std::min(n - 1, 8);
    int increasing = 0, decreasing = 0;
    for (int i = n - tail; i < n; ++i) {
        if (vals[i] > vals[i - 1]) ++increasing;
        else if (vals[i] < vals[i - 1]) ++decreasing;
    }
    const double end = vals.back();
    const bool big = end > 10.0 * interior_min && end > interior_min;
    if (big && increasing == tail) return TriState::pass;
    if (decreasing == tail || (decreasing > increasing && !big)) return TriState::fail;
    if (!std::isfinite(end) && increasing >= tail - 1) return TriState::pass;
    return TriState::indeterminate;
}

}  // namespace detail

/// Numerical check of the standing cost assumptions: inf-compactness of c0,
/// c0 -> infinity at boundaries inside the state space, integrability of c0
/// against the speed measure near b, divergence of the double integral at b,
/// and monotonicity of the ordering shape H.
inline CostValidationReport validate_costs(const ScaleSpeed& ss, const BoundaryReport& br, const CostModel& costs,
                                          double half_width = 12.0, int cells = 240) {
    CostValidationReport rep;
    const auto& model = ss.model();
    const auto& map = ss.map();
    const double uc = map.to_u(model.anchor);

    // (i) inf-compactness on the domain-map grid
    std::vector<double> xs, vs;
    for (int i = 0; i <= cells; ++i) {
        double x = map.to_x(uc - half_width + 2.0 * half_width * i / cells);
        if (!model.interior(x)) continue;
        xs.push_back(x);
        vs.push_back(costs.c0(x));
    }
    double vmin = *std::min_element(vs.begin(), vs.end());
    std::vector<double> toward_left(vs.rbegin(), vs.rend());
    // a reflecting left end belongs to the state space, so c0 need not grow there
    auto left = model.reflecting_left ? TriState::pass : detail::growth_toward_end(toward_left, vmin);
    auto right = detail::growth_toward_end(vs, vmin);
    if (left != TriState::pass) rep.witnesses.push_back(detail::fmt_point("c0 does not grow toward a:", xs.front(), vs.front()));
    if (right != TriState::pass) rep.witnesses.push_back(detail::fmt_point("c0 does not grow toward b:", xs.back(), vs.back()));
    rep.infCompactOk = tri_and(left, right);

    // (iv) c0 -> infinity at boundaries that belong to the state space
    auto limit_at = [&](double boundary) {
        std::vector<double> seq;
        for (int k = 1; k <= 48; ++k) {
            double x = boundary + (model.anchor - boundary) * std::ldexp(1.0, -k);
            if (!model.interior(x)) break;
            seq.push_back(costs.c0(x));
        }
        if (seq.size() < 4) return TriState::indeterminate;
        double first = seq.front(), last = seq.back();
        int inc = 0, dec = 0;
        for (size_t i = seq.size() - 16; i < seq.size(); ++i) {
            if (seq[i] > seq[i - 1]) ++inc;
            else if (seq[i] < seq[i - 1]) ++dec;
        }
        if (inc == 16 && last > 10.0 * std::max(first, 1e-300)) return TriState::pass;
        if (inc < 8 || last < 2.0 * std::max(first, 1e-300)) {
            rep.witnesses.push_back(detail::fmt_point("c0 bounded near attainable boundary:", boundary, last));
            return TriState::fail;
        }
        return TriState::indeterminate;
    };
    rep.limitAtAOk = TriState::pass;
    if (br.leftAttainable && std::isfinite(model.left)) rep.limitAtAOk = tri_and(rep.limitAtAOk, limit_at(model.left));
    if (br.rightClass == BoundaryClass::entrance && std::isfinite(model.right))
        rep.limitAtAOk = tri_and(rep.limitAtAOk, limit_at(model.right));

    // (ii) and (iii) integrals toward b from the anchor
    auto c0m = [&](double v) { return costs.c0(v) * ss.speed_density(v); };
    auto s = [&](double v) { return ss.scale_density(v); };
    quad::WalkOptions wo = ss.walk_options();
    wo.rel_tol = 1e-10;
    rep.c0MIntegral = quad::integrate_toward(c0m, model.anchor, model.right, wo);
    rep.c0MIntegrableOk = rep.c0MIntegral.is_finite()     ? TriState::pass
                          : rep.c0MIntegral.is_infinite() ? TriState::fail
                                                          : TriState::indeterminate;
    rep.doubleIntegral = quad::integrate_nested_toward(c0m, s, model.anchor, model.right, wo);
    rep.doubleIntegralDivergesOk = rep.doubleIntegral.is_infinite() ? TriState::pass
                                   : rep.doubleIntegral.is_finite() ? TriState::fail
                                                                    : TriState::indeterminate;
    if (rep.doubleIntegralDivergesOk == TriState::fail)
        rep.witnesses.push_back("double integral of c0 toward b is finite: " + rep.doubleIntegral.to_string());
    if (rep.c0MIntegrableOk == TriState::fail) rep.witnesses.push_back("c0 is not integrable against M near b");

    // H nondecreasing on the grid, so c1 >= k1 and c1 is decreasing in y
    rep.orderingShapeOk = costs.k1 > 0 ? TriState::pass : TriState::fail;
    for (size_t i = 1; i < xs.size(); ++i) {
        if (costs.H(xs[i]) < costs.H(xs[i - 1]) - 1e-12 * (1 + std::abs(costs.H(xs[i - 1])))) {
            rep.orderingShapeOk = TriState::fail;
            rep.witnesses.push_back(detail::fmt_point("H decreasing near", xs[i], costs.H(xs[i])));
            break;
        }
    }
    return rep;
}

}  // namespace sspolicy
