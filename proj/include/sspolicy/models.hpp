#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sspolicy/characteristics.hpp"
#include "sspolicy/costs.hpp"
#include "sspolicy/diffusion.hpp"

namespace sspolicy {

/// Drifted Brownian motion dX = -mu dt + sigma dW, optionally reflected at 0.
struct DbmParams {
    double mu = 1.0;
    double sigma = 1.0;
    double c_b = 1.0;
    double c_h = 1.0;
    double k1 = 1.0;
    double k2 = 0.0;
    bool reflected = false;
    double k5 = 0.0;

    void validate() const {
        if (!(mu > 0 && sigma > 0 && c_h > 0 && k1 > 0 && k2 >= 0 && k5 >= 0))
            throw std::invalid_argument("DbmParams: need mu, sigma, c_h, k1 > 0 and k2, k5 >= 0");
        if (!reflected && !(c_b > 0)) throw std::invalid_argument("DbmParams: need c_b > 0");
    }
    double lambda() const { return 2 * mu / (sigma * sigma); }
};

/// Geometric Brownian motion dX = -mu X dt + sigma X dW on (0, inf) with
/// c0(x) = k3 x + k4 x^beta and c1(y,z) = k1 + k2 (z^eta - y^eta).
struct GbmParams {
    double mu = 0.5;
    double sigma = 1.0;
    double k1 = 1.0;
    double k2 = 1.0;
    double k3 = 1.0;
    double k4 = 1.0;
    double beta = -1.0;
    double eta = 1.0;

    void validate() const {
        if (!(mu > 0 && sigma > 0 && k1 > 0 && k2 >= 0 && k3 >= 0 && k4 >= 0 && beta < 0 && eta > 0 && eta <= 1))
            throw std::invalid_argument("GbmParams: parameter out of range");
    }
    double rho_tilde() const { return 0.5 * sigma * sigma * beta * beta - (mu + 0.5 * sigma * sigma) * beta; }
    double zeta_coef() const { return 2.0 / (2 * mu + sigma * sigma); }
};

/// x^p evaluated through logarithms so large negative p near 0 saturates cleanly.
inline double pow_log(double x, double p) { return std::exp(p * std::log(x)); }

// ---------------------------------------------------------------- diffusions

inline DiffusionModel dbm_model(const DbmParams& p, bool exact_scale = true) {
    p.validate();
    DiffusionModel m;
    const double mu = p.mu, sg = p.sigma;
    m.drift = [mu](double) { return -mu; };
    m.diffusion = [sg](double) { return sg; };
    if (p.reflected) {
        m.left = 0.0;
        m.anchor = 1.0;
        m.reflecting_left = true;
        m.name = "reflected_dbm";
    } else {
        m.anchor = 0.0;
        m.name = "dbm";
    }
    if (exact_scale) {
        const double lam = p.lambda(), c = m.anchor;
        m.log_scale_exact = [lam, c](double x) { return lam * (x - c); };
    }
    return m;
}

inline DiffusionModel gbm_model(const GbmParams& p, bool exact_scale = true) {
    p.validate();
    DiffusionModel m;
    const double mu = p.mu, sg = p.sigma;
    m.drift = [mu](double x) { return -mu * x; };
    m.diffusion = [sg](double x) { return sg * x; };
    m.left = 0.0;
    m.anchor = 1.0;
    m.name = "gbm";
    if (exact_scale) {
        const double q = 2 * mu / (sg * sg);
        m.log_scale_exact = [q](double x) { return q * std::log(x); };
    }
    return m;
}

// --------------------------------------------------------------------- costs

inline CostModel dbm_costs(const DbmParams& p) {
    p.validate();
    CostModel c;
    const double cb = p.c_b, ch = p.c_h, k2 = p.k2;
    if (p.reflected) c.c0 = [ch](double x) { return ch * x; };
    else c.c0 = [cb, ch](double x) { return x < 0 ? -cb * x : ch * x; };
    c.k1 = p.k1;
    c.H = [k2](double x) { return k2 * x; };
    c.Hp = [k2](double) { return k2; };
    c.Hpp = [](double) { return 0.0; };
    c.k5 = p.k5;
    c.params = {{"c_b", p.c_b}, {"c_h", p.c_h}, {"k1", p.k1}, {"k2", p.k2}, {"k5", p.k5}};
    c.name = p.reflected ? "reflected_dbm" : "dbm";
    return c;
}

inline CostModel gbm_costs(const GbmParams& p) {
    p.validate();
    CostModel c;
    const double k2 = p.k2, k3 = p.k3, k4 = p.k4, b = p.beta, eta = p.eta;
    c.c0 = [k3, k4, b](double x) { return k3 * x + (k4 == 0 ? 0.0 : k4 * pow_log(x, b)); };
    c.k1 = p.k1;
    c.H = [k2, eta](double x) { return k2 * pow_log(x, eta); };
    c.Hp = [k2, eta](double x) { return k2 * eta * pow_log(x, eta - 1); };
    c.Hpp = [k2, eta](double x) { return k2 * eta * (eta - 1) * pow_log(x, eta - 2); };
    c.params = {{"k1", p.k1}, {"k2", p.k2}, {"k3", p.k3}, {"k4", p.k4}, {"beta", p.beta}, {"eta", p.eta}};
    c.name = "gbm";
    return c;
}

// ------------------------------------------------------------ characteristics

inline double dbm_g0(const DbmParams& p, double x) {
    const double mu = p.mu, s2 = p.sigma * p.sigma;
    if (p.reflected || x >= 0) return p.c_h / (2 * mu) * x * x + s2 * p.c_h / (2 * mu * mu) * x;
    return -p.c_b / (2 * mu) * x * x - s2 * p.c_b / (2 * mu * mu) * x +
           s2 * s2 * (p.c_b + p.c_h) / (4 * mu * mu * mu) * std::expm1(2 * mu * x / s2);
}

inline double dbm_g0_prime(const DbmParams& p, double x) {
    const double mu = p.mu, s2 = p.sigma * p.sigma;
    if (p.reflected || x >= 0) return p.c_h / mu * x + s2 * p.c_h / (2 * mu * mu);
    return -p.c_b / mu * x - s2 * p.c_b / (2 * mu * mu) + s2 * (p.c_b + p.c_h) / (2 * mu * mu) * std::exp(2 * mu * x / s2);
}

inline double dbm_g0_second(const DbmParams& p, double x) {
    const double mu = p.mu, s2 = p.sigma * p.sigma;
    if (p.reflected || x >= 0) return p.c_h / mu;
    return -p.c_b / mu + (p.c_b + p.c_h) / mu * std::exp(2 * mu * x / s2);
}

/// Closed-form g0 and zeta for drifted Brownian motion.
inline Characteristics dbm_characteristics(const DbmParams& p) {
    p.validate();
    Characteristics ch;
    ch.mode = Characteristics::Mode::closed_form;
    ch.anchor = p.reflected ? 1.0 : 0.0;
    if (p.reflected) {
        ch.left = 0.0;
        ch.leftAttainable = true;
    }
    const double mu = p.mu;
    ch.g0 = [p](double x) { return dbm_g0(p, x); };
    ch.g0_prime = [p](double x) { return dbm_g0_prime(p, x); };
    ch.g0_second_exact = [p](double x) { return dbm_g0_second(p, x); };
    ch.zeta = [mu](double x) { return x / mu; };
    ch.zeta_prime = [mu](double) { return 1.0 / mu; };
    ch.zeta_second_exact = [](double) { return 0.0; };
    return ch;
}

/// Level where g0' attains its minimum; the optimal pair straddles it.
inline double dbm_xbar(const DbmParams& p) {
    return p.sigma * p.sigma / (2 * p.mu) * std::log(p.c_b / (p.c_b + p.c_h));
}

inline double dbm_F(const DbmParams& p, double y, double z) {
    return (p.k1 + p.k2 * (z - y) + dbm_g0(p, z) - dbm_g0(p, y)) / ((z - y) / p.mu);
}

/// Closed-form g0 and zeta for geometric Brownian motion (anchored at 1).
inline Characteristics gbm_characteristics(const GbmParams& p) {
    p.validate();
    Characteristics ch;
    ch.mode = Characteristics::Mode::closed_form;
    ch.anchor = 1.0;
    ch.left = 0.0;
    const double k3m = p.k3 / p.mu, b = p.beta, kr = p.k4 / p.rho_tilde(), zc = p.zeta_coef();
    ch.g0 = [k3m, b, kr](double x) { return k3m * (x - 1) - (kr == 0 ? 0.0 : kr * (pow_log(x, b) - 1)); };
    ch.g0_prime = [k3m, b, kr](double x) { return k3m - (kr == 0 ? 0.0 : kr * b * pow_log(x, b - 1)); };
    ch.g0_second_exact = [b, kr](double x) { return kr == 0 ? 0.0 : -kr * b * (b - 1) * pow_log(x, b - 2); };
    ch.zeta = [zc](double x) { return zc * std::log(x); };
    ch.zeta_prime = [zc](double x) { return zc / x; };
    ch.zeta_second_exact = [zc](double x) { return -zc / (x * x); };
    return ch;
}

inline double gbm_F(const GbmParams& p, double y, double z) {
    double num = p.k1 + p.k2 * (pow_log(z, p.eta) - pow_log(y, p.eta)) + p.k3 / p.mu * (z - y);
    if (p.k4 != 0) num -= p.k4 / p.rho_tilde() * (pow_log(z, p.beta) - pow_log(y, p.beta));
    return num / (p.zeta_coef() * (std::log(z) - std::log(y)));
}

/// First-order level function: F* = (mu + sigma^2/2) h(y*) = (mu + sigma^2/2) h(z*).
inline double gbm_h(const GbmParams& p, double x) {
    return p.k3 / p.mu * x + p.k2 * p.eta * pow_log(x, p.eta) +
           (p.k4 == 0 ? 0.0 : p.k4 * (-p.beta) / p.rho_tilde() * pow_log(x, p.beta));
}

/// AG + c0 on the lower branch of G.
inline double gbm_h_tilde(const GbmParams& p, double x) {
    const double s2 = p.sigma * p.sigma;
    return p.k3 * x + p.k2 * (p.mu * p.eta + 0.5 * s2 * p.eta * (1 - p.eta)) * pow_log(x, p.eta) +
           (p.k4 == 0 ? 0.0 : p.k4 * pow_log(x, p.beta));
}

enum class GbmRegime { standard, no_order_optimal, no_optimum, k3_zero_solvable };

inline const char* to_string(GbmRegime r) {
    switch (r) {
    case GbmRegime::standard: return "standard";
    case GbmRegime::no_order_optimal: return "no_order_optimal";
    case GbmRegime::no_optimum: return "no_optimum";
    default: return "k3_zero_solvable";
    }
}

inline GbmRegime gbm_regime(const GbmParams& p) {
    if (p.k4 == 0) return GbmRegime::no_order_optimal;
    if (p.k3 == 0 && p.k2 == 0) return GbmRegime::no_optimum;
    if (p.k3 == 0) return GbmRegime::k3_zero_solvable;
    return GbmRegime::standard;
}

// ------------------------------------------------ reflected drifted BM results

struct OptimalPair {
    double y = 0.0, z = 0.0, F = 0.0;
};

inline OptimalPair reflected_dbm_optimum(const DbmParams& p) {
    if (!p.reflected) throw std::invalid_argument("reflected_dbm_optimum: model is not reflected");
    OptimalPair r;
    r.y = 0.0;
    r.z = std::sqrt(2 * p.k1 * p.mu / p.c_h);
    r.F = std::sqrt(2 * p.k1 * p.mu * p.c_h) + p.k2 * p.mu + p.sigma * p.sigma * p.c_h / (2 * p.mu);
    return r;
}

/// Long-run average cost of pure reflection at 0 (just-in-time ordering).
inline double jit_cost(const DbmParams& p) { return p.sigma * p.sigma * p.c_h / (2 * p.mu) + p.k5 * p.mu; }

/// Just-in-time ordering is strictly cheaper than the optimal (s,S) policy.
inline bool jit_better_than_sS(const DbmParams& p) {
    const double zs = reflected_dbm_optimum(p).z;
    return p.k5 - p.k2 < p.c_h * zs / p.mu;
}

/// Cost of the delayed (y,z) policy with trigger 0: after each order the next
/// order waits for a visit to 0 and is then placed when X rises back to y.
inline double delayed_policy_cost(const DbmParams& p, double y, double z) {
    if (!p.reflected) throw std::invalid_argument("delayed_policy_cost: model is not reflected");
    if (!(y >= 0 && y < z)) throw DomainError("delayed_policy_cost: need 0 <= y < z");
    const double mu = p.mu, s2 = p.sigma * p.sigma;
    const double e = std::expm1(2 * mu * y / s2);
    const double num = p.k1 + p.k2 * (z - y) + dbm_g0(p, z) - dbm_g0(p, y) +
                       (s2 * s2 * p.c_h / (4 * mu * mu * mu) + s2 * p.k5 / (2 * mu)) * e;
    const double den = (z - y) / mu + s2 / (2 * mu * mu) * e;
    return num / den;
}

/// Expected length of one delayed-policy cycle (reciprocal of the order rate).
inline double delayed_cycle_length(const DbmParams& p, double y, double z) {
    const double mu = p.mu, s2 = p.sigma * p.sigma;
    return (z - y) / mu + s2 / (2 * mu * mu) * std::expm1(2 * mu * y / s2);
}

/// Long-run local time rate at 0 under the delayed policy.
inline double delayed_reflection_rate(const DbmParams& p, double y, double z) {
    const double s2 = p.sigma * p.sigma;
    return s2 / (2 * p.mu) * std::expm1(2 * p.mu * y / s2) / delayed_cycle_length(p, y, z);
}

/// Numerator of dF~/dy (the denominator is positive).
inline double delayed_cost_dy_numerator(const DbmParams& p, double y, double z) {
    const double mu = p.mu, s2 = p.sigma * p.sigma, ch = p.c_h;
    const double e = std::expm1(2 * mu * y / s2);
    return -ch / (mu * mu) * y * (z - y) -
           (ch * s2 * y + ch * mu * (z * z - y * y) + 2 * mu * mu * p.k1) / (2 * mu * mu * mu) * e -
           (p.k2 - p.k5) * ((z - y) / mu * std::exp(2 * mu * y / s2) + s2 / (2 * mu * mu) * e);
}

struct DelayedComparison {
    double F = 0.0;
    double F_delayed = 0.0;
    /// F~(y,z) < F(y,z)
    bool delayed_cheaper = false;
    /// sigma^2 c_h/(2 mu) + k5 mu < F(y,z)
    bool rate_criterion = false;
    /// k5 < k2 + sqrt(2 k1 c_h / mu): delayed cheaper for every 0 < y < z
    bool sufficient_all_pairs = false;
    /// k5 < k2: raising y above 0 lowers the delayed cost
    bool edge_improvement = false;
};

inline DelayedComparison delayed_beats_sS(const DbmParams& p, double y, double z) {
    DelayedComparison c;
    c.F = dbm_F(p, y, z);
    c.F_delayed = delayed_policy_cost(p, y, z);
    c.delayed_cheaper = c.F_delayed < c.F;
    c.rate_criterion = jit_cost(p) < c.F;
    c.sufficient_all_pairs = p.k5 < p.k2 + std::sqrt(2 * p.k1 * p.c_h / p.mu);
    c.edge_improvement = p.k5 < p.k2;
    return c;
}

/// Stationary density of the delayed (y,z) policy with trigger 0.
inline double delayed_density(const DbmParams& p, double y, double z, double x) {
    if (x < 0) return 0.0;
    const double mu = p.mu, lam = p.lambda();
    const double a1 = 1.0 / delayed_cycle_length(p, y, z);
    double v = 0.0;
    if (x <= y) v += std::expm1(lam * (y - x));
    if (x <= z) v += -std::expm1(-lam * x);
    else v += std::expm1(lam * z) * std::exp(-lam * x);
    return a1 * v / mu;
}

/// Stationary density of pure reflection at 0.
inline double jit_density(const DbmParams& p, double x) { return x < 0 ? 0.0 : p.lambda() * std::exp(-p.lambda() * x); }

}  // namespace sspolicy
