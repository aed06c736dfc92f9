#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sspolicy/characteristics.hpp"
#include "sspolicy/costs.hpp"
#include "sspolicy/diffusion.hpp"
#include "sspolicy/extended_real.hpp"
#include "sspolicy/solver.hpp"

namespace sspolicy {

/// Candidate value function
///   G(x) = c1(x,z*) + g0(z*) - F* zeta(z*)  for x <= y*,
///   G(x) = g0(x) - F* zeta(x)               for x >  y*.
struct GSolution {
    double yStar = 0, zStar = 0;
    /// F* used by the constraint checks; G itself is built from `builtFStar`.
    double FStar = 0;
    double builtFStar = 0;
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    RealFn G, Gprime, Gsecond;
    /// |G'(y*+) - G'(y*-)|; zero when y* is the left boundary.
    double gluingResidual = 0.0;

    /// 0 for the ordering branch (x <= y*), 1 for the continuation branch.
    int branch(double x) const { return x <= yStar ? 0 : 1; }
};

inline GSolution build_G(const Characteristics& ch, const CostModel& costs, double y, double z, double F) {
    GSolution g;
    g.yStar = y;
    g.zStar = z;
    g.FStar = F;
    g.builtFStar = F;
    g.left = ch.left;
    g.right = ch.right;
    const double level = ch.g0(z) - F * ch.zeta(z);
    auto chp = std::make_shared<Characteristics>(ch);
    auto cp = std::make_shared<CostModel>(costs);
    g.G = [chp, cp, y, z, F, level](double x) {
        return x <= y ? cp->c1(x, z) + level : chp->g0(x) - F * chp->zeta(x);
    };
    g.Gprime = [chp, cp, y, z, F](double x) {
        return x <= y ? cp->dc1_dy(x, z) : chp->g0_prime(x) - F * chp->zeta_prime(x);
    };
    g.Gsecond = [chp, cp, y, z, F](double x) {
        return x <= y ? cp->d2c1_dy2(x, z) : chp->g0_second(x) - F * chp->zeta_second(x);
    };
    if (y > ch.left) {
        const double upper = ch.g0_prime(y) - F * ch.zeta_prime(y);
        g.gluingResidual = std::abs(upper - costs.dc1_dy(y, z));
    }
    return g;
}

inline GSolution build_G(const Characteristics& ch, const CostModel& costs, const SolveReport& rep) {
    if (!rep.found()) throw DomainError("build_G: the solve report has no minimizer");
    return build_G(ch, costs, rep.yStar, rep.zStar, rep.FStar);
}

struct QviWitness {
    std::string constraint;
    double x = 0, y = 0, z = 0;
    double value = 0;
};

struct QviConfig {
    int points = 200;
    /// Points per axis of the triangular (y,z) grid.
    int pair_points = 60;
    /// Extra width, in domain-map units, beyond y* and z*.
    double margin = 3.0;
    double tol_factor = 1e-6;
    size_t max_witnesses = 20;
};

struct QVIReport {
    double tol = 0;
    std::vector<double> grid;
    /// min of AG + c0 - F* over the grid minus {y*}
    double worstSlackA = std::numeric_limits<double>::infinity();
    /// min of BG + c1 over the triangular grid
    double worstSlackB = std::numeric_limits<double>::infinity();
    /// max |AG + c0 - F*| for x > y*
    double equalityResidualUpper = 0;
    /// max |BG(x,z*) + c1(x,z*)| for x <= y*
    double equalityResidualLower = 0;
    double gluingResidual = 0;
    /// max over x of |min(AG + c0 - F*, min_z BG(x,z) + c1(x,z))|
    double qviResidual = 0;
    bool line1 = true, line2 = true, line3 = true, line4 = true, gluing = true;
    TriState condition36Verdict = TriState::indeterminate;
    std::string condition36VerdictNote;
    std::vector<QviWitness> witnesses;
    bool pass = false;
};

/// Samples x on the domain-map grid spanning y* and z* with a margin.
inline std::vector<double> qvi_grid(const GSolution& g, const DiffusionModel& model, const QviConfig& cfg) {
    const DomainMap map(model.left, model.right, model.scale);
    const double uc = map.to_u(model.anchor);
    const double uy = g.yStar > model.left ? map.to_u(g.yStar) : uc;
    const double uz = map.to_u(g.zStar);
    const double lo = std::min(uy, uc) - cfg.margin, hi = std::max(uz, uc) + cfg.margin;
    std::vector<double> xs;
    for (int i = 0; i < cfg.points; ++i) {
        double x = map.to_x(lo + (hi - lo) * (i + 0.5) / cfg.points);
        if (model.interior(x)) xs.push_back(x);
    }
    return xs;
}

inline double qvi_AG(const GSolution& g, const DiffusionModel& model, double x) {
    return generator_apply(model, x, g.Gprime(x), g.Gsecond(x));
}

inline TriState check_condition_36(const GSolution& g, const DiffusionModel& model, const CostModel& costs,
                                   std::string* note = nullptr, int points = 200, double span = 6.0);

/// Checks the four lines of the QVI system on sampled points.
inline QVIReport verify_qvi(const GSolution& g, const DiffusionModel& model, const CostModel& costs,
                            const QviConfig& cfg = {}) {
    QVIReport r;
    const double F = g.FStar;
    r.tol = cfg.tol_factor * (1 + std::abs(F));
    r.grid = qvi_grid(g, model, cfg);
    auto witness = [&](const char* c, double x, double y, double z, double v) {
        size_t n = static_cast<size_t>(std::count_if(r.witnesses.begin(), r.witnesses.end(),
                                                     [&](const QviWitness& w) { return w.constraint == c; }));
        if (n < cfg.max_witnesses) r.witnesses.push_back({c, x, y, z, v});
    };

    for (double x : r.grid) {
        if (x == g.yStar) continue;
        const double slack = qvi_AG(g, model, x) + costs.c0(x) - F;
        r.worstSlackA = std::min(r.worstSlackA, slack);
        if (slack < -r.tol) {
            r.line1 = false;
            witness("AG+c0-F>=0", x, x, x, slack);
        }
        if (x > g.yStar) {
            r.equalityResidualUpper = std::max(r.equalityResidualUpper, std::abs(slack));
            if (std::abs(slack) > r.tol) {
                r.line3 = false;
                witness("AG+c0-F=0", x, x, x, slack);
            }
        } else {
            const double eq = g.G(g.zStar) - g.G(x) + costs.c1(x, g.zStar);
            r.equalityResidualLower = std::max(r.equalityResidualLower, std::abs(eq));
            if (std::abs(eq) > r.tol) {
                r.line4 = false;
                witness("BG(x,z*)+c1=0", x, x, g.zStar, eq);
            }
        }
    }

    // triangular (y,z) grid
    std::vector<double> pg;
    const size_t stride = std::max<size_t>(1, r.grid.size() / static_cast<size_t>(cfg.pair_points));
    for (size_t i = 0; i < r.grid.size(); i += stride) pg.push_back(r.grid[i]);
    pg.push_back(g.yStar > model.left ? g.yStar : r.grid.front());
    pg.push_back(g.zStar);
    std::sort(pg.begin(), pg.end());
    pg.erase(std::unique(pg.begin(), pg.end()), pg.end());
    std::vector<double> Gv(pg.size());
    for (size_t i = 0; i < pg.size(); ++i) Gv[i] = g.G(pg[i]);
    for (size_t i = 0; i < pg.size(); ++i)
        for (size_t j = i + 1; j < pg.size(); ++j) {
            const double v = Gv[j] - Gv[i] + costs.c1(pg[i], pg[j]);
            r.worstSlackB = std::min(r.worstSlackB, v);
            if (v < -r.tol) {
                r.line2 = false;
                witness("BG+c1>=0", pg[i], pg[i], pg[j], v);
            }
        }

    // combined QVI form
    for (double x : r.grid) {
        if (x == g.yStar) continue;
        double a = qvi_AG(g, model, x) + costs.c0(x) - F;
        double b = std::numeric_limits<double>::infinity();
        const double gx = g.G(x);
        for (size_t j = 0; j < pg.size(); ++j)
            if (pg[j] > x) b = std::min(b, Gv[j] - gx + costs.c1(x, pg[j]));
        if (x <= g.yStar) b = std::min(b, g.G(g.zStar) - gx + costs.c1(x, g.zStar));
        r.qviResidual = std::max(r.qviResidual, std::abs(std::min(a, b)));
    }

    r.gluingResidual = g.gluingResidual;
    r.gluing = g.gluingResidual <= cfg.tol_factor * (1 + std::abs(g.Gprime(g.zStar))) + r.tol;
    if (!r.gluing) witness("C1 gluing at y*", g.yStar, g.yStar, g.zStar, g.gluingResidual);
    r.condition36Verdict = check_condition_36(g, model, costs, &r.condition36VerdictNote);
    r.pass = r.line1 && r.line2 && r.line3 && r.line4 && r.gluing;
    return r;
}

/// Whether AG + c0 is nonincreasing on (a, y*). Vacuous pass when y* = a.
/// A non-monotone profile yields indeterminate unless AG + c0 - F* < 0 somewhere below y*.
inline TriState check_condition_36(const GSolution& g, const DiffusionModel& model, const CostModel& costs,
                                   std::string* note, int points, double span) {
    auto say = [&](const std::string& s) {
        if (note) *note = s;
    };
    if (!(g.yStar > model.left)) {
        say("y* is the left boundary; the condition is vacuous");
        return TriState::pass;
    }
    const DomainMap map(model.left, model.right, model.scale);
    const double uy = map.to_u(g.yStar);
    const double tol = 1e-6 * (1 + std::abs(g.FStar));
    std::vector<double> v;
    std::vector<double> xs;
    for (int i = 0; i < points; ++i) {
        const double x = map.to_x(uy - span + span * i / points);
        if (!(x > model.left && x < g.yStar)) continue;
        xs.push_back(x);
        v.push_back(qvi_AG(g, model, x) + costs.c0(x));
    }
    bool monotone = true, raw_ok = true;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i + 1 < v.size() && v[i + 1] > v[i] + tol) monotone = false;
        if (v[i] - g.FStar < -tol) raw_ok = false;
    }
    if (monotone) {
        say("AG + c0 is nonincreasing on the sampled part of (a, y*)");
        return TriState::pass;
    }
    if (!raw_ok) {
        say("AG + c0 - F* is negative below y*");
        return TriState::fail;
    }
    say("AG + c0 is not monotone below y*, but AG + c0 - F* >= 0 holds on the samples");
    return TriState::indeterminate;
}

}  // namespace sspolicy
