#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace sspolicy {

struct NelderMeadOptions {
    int max_iter = 3000;
    double f_tol = 1e-13;
    double x_tol = 1e-10;
    double initial_step = 0.5;
};

struct NelderMeadResult {
    std::array<double, 2> x{};
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Two-dimensional Nelder-Mead simplex descent. Non-finite objective values
/// are treated as +infinity, so the simplex never steps into them.
template <class F>
NelderMeadResult nelder_mead_2d(F&& f, std::array<double, 2> x0, const NelderMeadOptions& opt = {}) {
    using P = std::array<double, 2>;
    auto eval = [&](const P& p) {
        double v = f(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    std::array<P, 3> s{x0, P{x0[0] + opt.initial_step, x0[1]}, P{x0[0], x0[1] + opt.initial_step}};
    std::array<double, 3> fv{eval(s[0]), eval(s[1]), eval(s[2])};
    NelderMeadResult r;
    auto order = [&] {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        std::array<P, 3> s2{s[idx[0]], s[idx[1]], s[idx[2]]};
        std::array<double, 3> f2{fv[idx[0]], fv[idx[1]], fv[idx[2]]};
        s = s2;
        fv = f2;
    };
    for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
        order();
        double size = 0.0;
        for (int i = 1; i < 3; ++i)
            size = std::max(size, std::max(std::abs(s[i][0] - s[0][0]), std::abs(s[i][1] - s[0][1])));
        if (std::isfinite(fv[2]) && std::abs(fv[2] - fv[0]) <= opt.f_tol * (1.0 + std::abs(fv[0])) &&
            size <= opt.x_tol) {
            r.converged = true;
            break;
        }
        if (size <= 1e-14) {
            r.converged = true;
            break;
        }
        const P c{0.5 * (s[0][0] + s[1][0]), 0.5 * (s[0][1] + s[1][1])};
        auto along = [&](double t) { return P{c[0] + t * (s[2][0] - c[0]), c[1] + t * (s[2][1] - c[1])}; };
        P xr = along(-1.0);
        double fr = eval(xr);
        if (fr < fv[0]) {
            P xe = along(-2.0);
            double fe = eval(xe);
            if (fe < fr) {
                s[2] = xe;
                fv[2] = fe;
            } else {
                s[2] = xr;
                fv[2] = fr;
            }
            continue;
        }
        if (fr < fv[1]) {
            s[2] = xr;
            fv[2] = fr;
            continue;
        }
        P xc = fr < fv[2] ? along(-0.5) : along(0.5);
        double fc = eval(xc);
        if (fc < std::min(fr, fv[2])) {
            s[2] = xc;
            fv[2] = fc;
            continue;
        }
        for (int i = 1; i < 3; ++i) {
            s[i] = P{s[0][0] + 0.5 * (s[i][0] - s[0][0]), s[0][1] + 0.5 * (s[i][1] - s[0][1])};
            fv[i] = eval(s[i]);
        }
    }
    order();
    r.x = s[0];
    r.f = fv[0];
    return r;
}

}  // namespace sspolicy
