#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sspolicy/domain_map.hpp"
#include "sspolicy/extended_real.hpp"
#include "sspolicy/quadrature.hpp"

namespace sspolicy {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

using RealFn = std::function<double(double)>;

/// Uncontrolled one-dimensional diffusion dX = mu(X) dt + sigma(X) dW on (a,b).
struct DiffusionModel {
    RealFn drift;
    RealFn diffusion;
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    double anchor = 0.0;
    /// Regular left boundary handled by instantaneous reflection.
    bool reflecting_left = false;
    std::string name = "custom";
    /// Optional exact ln s(x) (anchored at `anchor`); skips quadrature when present.
    RealFn log_scale_exact;
    /// Length scale used by the domain map and boundary proximity tests.
    double scale = 1.0;

    DomainMap domain_map() const { return DomainMap(left, right, scale); }
    bool interior(double x) const { return x > left && x < right; }

    void validate(int samples = 64) const {
        if (!drift || !diffusion) throw std::invalid_argument("DiffusionModel: missing coefficient function");
        if (!(left < anchor && anchor < right)) throw std::invalid_argument("DiffusionModel: need a < C < b");
        auto map = domain_map();
        const double uc = map.to_u(anchor);
        for (int i = 0; i <= samples; ++i) {
            double x = map.to_x(uc - 10.0 + 20.0 * i / samples);
            if (!interior(x)) continue;
            double sg = diffusion(x);
            if (!(sg > 0.0) || !std::isfinite(sg))
                throw std::invalid_argument("DiffusionModel: diffusion coefficient must be positive at x=" +
                                            std::to_string(x));
        }
    }
};

/// Scale and speed densities and measures of a diffusion, anchored at C.
/// The log scale density is tabulated once in the domain-map coordinate and
/// refined locally by quadrature, so repeated evaluations stay cheap.
class ScaleSpeed {
public:
    explicit ScaleSpeed(DiffusionModel model) : m_(std::move(model)), map_(m_.domain_map()) {
        m_.validate();
        uc_ = map_.to_u(m_.anchor);
        if (!m_.log_scale_exact) build_table();
    }

    const DiffusionModel& model() const { return m_; }
    const DomainMap& map() const { return map_; }

    /// ln s(x)
    double log_scale(double x) const {
        check_interior(x);
        if (m_.log_scale_exact) return m_.log_scale_exact(x);
        const double u = map_.to_u(x);
        const double lo = table_u0_, hi = table_u0_ + h_ * (table_.size() - 1);
        if (u <= lo) return table_.front() + integrate_u(lo, u);
        if (u >= hi) return table_.back() + integrate_u(hi, u);
        // from the node below, so the result is continuous across nodes
        auto k = static_cast<size_t>(std::floor((u - lo) / h_));
        if (k >= table_.size() - 1) k = table_.size() - 2;
        return table_[k] + integrate_u(lo + h_ * k, u);
    }

    /// ln s(v) - ln s(x), integrated directly so no large logarithms cancel.
    double log_scale_increment(double x, double v) const {
        if (x == v) return 0.0;
        check_interior(x);
        check_interior(v);
        if (m_.log_scale_exact) return m_.log_scale_exact(v) - m_.log_scale_exact(x);
        const double ux = map_.to_u(x), uv = map_.to_u(v);
        if (std::abs(uv - ux) > h_) return integrate_u(ux, uv);
        auto g = [this](double w) {
            double sg = m_.diffusion(w);
            return -2.0 * m_.drift(w) / (sg * sg);
        };
        return quad::integrate(g, x, v, quad::Options{1e-14, 12});
    }

    /// s(x) = exp(-\int_C^x 2 mu / sigma^2)
    double scale_density(double x) const { return std::exp(log_scale(x)); }

    /// m(x) = 1 / (sigma^2(x) s(x))
    double speed_density(double x) const {
        double sg = m_.diffusion(x);
        return std::exp(-log_scale(x)) / (sg * sg);
    }

    /// S[y,z]; endpoints may equal a or b.
    ExtReal scale_measure(double y, double z) const {
        return measure(y, z, [this](double v) { return scale_density(v); });
    }

    /// M[y,z]; endpoints may equal a or b.
    ExtReal speed_measure(double y, double z) const {
        return measure(y, z, [this](double v) { return speed_density(v); });
    }

    /// Integral of f between y and z where either end may be a boundary.
    template <class F>
    ExtReal measure(double y, double z, F&& f) const {
        if (y > z) throw DomainError("measure: need y <= z");
        if (y < m_.left || z > m_.right) throw DomainError("measure: interval outside the state space");
        if (y == z) return ExtReal::finite(0.0);
        const bool ya = y == m_.left, zb = z == m_.right;
        if (!ya && !zb) return ExtReal::finite(quad::integrate(f, y, z));
        if (ya && zb) {
            return quad::integrate_toward(f, m_.anchor, m_.left, walk_opts_) +
                   quad::integrate_toward(f, m_.anchor, m_.right, walk_opts_);
        }
        if (ya) return quad::integrate_toward(f, z, m_.left, walk_opts_);
        return quad::integrate_toward(f, y, m_.right, walk_opts_);
    }

    const quad::WalkOptions& walk_options() const { return walk_opts_; }

private:
    void check_interior(double x) const {
        if (!(x > m_.left && x < m_.right))
            throw DomainError("point " + std::to_string(x) + " outside the open state space");
    }

    /// \int of -2 mu/sigma^2 dx expressed in u coordinates, from u0 to u1.
    double integrate_u(double u0, double u1) const {
        if (u0 == u1) return 0.0;
        auto g = [this](double u) {
            double x = map_.to_x(u);
            double sg = m_.diffusion(x);
            return -2.0 * m_.drift(x) / (sg * sg) * map_.jacobian(u);
        };
        return quad::integrate(g, u0, u1, quad::Options{1e-14, 12});
    }

    void build_table() {
        const int half = static_cast<int>(std::lround(half_width_ / h_));
        table_u0_ = uc_ - h_ * half;
        table_.assign(2 * half + 1, 0.0);
        for (int k = half + 1; k <= 2 * half; ++k)
            table_[k] = table_[k - 1] + integrate_u(table_u0_ + h_ * (k - 1), table_u0_ + h_ * k);
        for (int k = half - 1; k >= 0; --k)
            table_[k] = table_[k + 1] + integrate_u(table_u0_ + h_ * (k + 1), table_u0_ + h_ * k);
    }

    DiffusionModel m_;
    DomainMap map_;
    double uc_ = 0.0;
    double h_ = 0.125;
    double half_width_ = 40.0;
    double table_u0_ = 0.0;
    std::vector<double> table_;
    quad::WalkOptions walk_opts_{};
};

inline double scale_density(const ScaleSpeed& ss, double x) { return ss.scale_density(x); }
inline double speed_density(const ScaleSpeed& ss, double x) { return ss.speed_density(x); }
inline ExtReal scale_measure(const ScaleSpeed& ss, double y, double z) { return ss.scale_measure(y, z); }
inline ExtReal speed_measure(const ScaleSpeed& ss, double y, double z) { return ss.speed_measure(y, z); }

enum class BoundaryClass { regular, exit, entrance, natural, unknown };

inline const char* to_string(BoundaryClass c) {
    switch (c) {
    case BoundaryClass::regular: return "regular";
    case BoundaryClass::exit: return "exit";
    case BoundaryClass::entrance: return "entrance";
    case BoundaryClass::natural: return "natural";
    default: return "unknown";
    }
}

struct BoundaryReport {
    bool leftAttracting = false;
    bool rightAttracting = false;
    BoundaryClass leftClass = BoundaryClass::unknown;
    BoundaryClass rightClass = BoundaryClass::unknown;
    bool leftAttainable = false;
    bool rightAttainable = false;
    /// Feller integrals at both ends.
    ExtReal Sigma_a, N_a, Sigma_b, N_b;
    /// S(a,C], S[C,b), M(a,C], M[C,b)
    ExtReal S_left, S_right, M_left, M_right;
    TriState admissible = TriState::indeterminate;
    std::vector<std::string> notes;
};

namespace detail {
inline BoundaryClass feller_class(const ExtReal& sigma, const ExtReal& n) {
    if (sigma.is_indeterminate() || n.is_indeterminate()) return BoundaryClass::unknown;
    if (sigma.is_finite()) return n.is_finite() ? BoundaryClass::regular : BoundaryClass::exit;
    return n.is_finite() ? BoundaryClass::entrance : BoundaryClass::natural;
}
}  // namespace detail

/// Feller classification of both boundaries and the admissibility verdict
/// (left boundary attracting, right boundary non-attracting).
inline BoundaryReport classify_boundaries(const ScaleSpeed& ss) {
    const auto& m = ss.model();
    const double c = m.anchor;
    auto s = [&](double x) { return ss.scale_density(x); };
    auto sp = [&](double x) { return ss.speed_density(x); };
    quad::WalkOptions wo = ss.walk_options();
    wo.rel_tol = 1e-10;

    BoundaryReport r;
    r.S_left = quad::integrate_toward(s, c, m.left, wo);
    r.S_right = quad::integrate_toward(s, c, m.right, wo);
    r.M_left = quad::integrate_toward(sp, c, m.left, wo);
    r.M_right = quad::integrate_toward(sp, c, m.right, wo);
    r.Sigma_a = quad::integrate_nested_toward(s, sp, c, m.left, wo);
    r.N_a = quad::integrate_nested_toward(sp, s, c, m.left, wo);
    r.Sigma_b = quad::integrate_nested_toward(s, sp, c, m.right, wo);
    r.N_b = quad::integrate_nested_toward(sp, s, c, m.right, wo);

    r.leftAttracting = r.S_left.is_finite();
    r.rightAttracting = r.S_right.is_finite();
    r.leftAttainable = r.Sigma_a.is_finite();
    r.rightAttainable = r.Sigma_b.is_finite();
    r.leftClass = detail::feller_class(r.Sigma_a, r.N_a);
    r.rightClass = detail::feller_class(r.Sigma_b, r.N_b);

    if (r.S_left.is_indeterminate() || r.S_right.is_indeterminate()) {
        r.admissible = TriState::indeterminate;
        r.notes.push_back("scale measure toward a boundary could not be certified");
    } else {
        r.admissible = (r.leftAttracting && !r.rightAttracting) ? TriState::pass : TriState::fail;
    }
    if (r.leftClass == BoundaryClass::regular && !m.reflecting_left)
        r.notes.push_back("left boundary is regular; only reflecting behaviour is supported");
    if (r.rightAttainable) r.notes.push_back("right boundary is attainable");
    return r;
}

inline BoundaryReport classify_boundaries(const DiffusionModel& model) { return classify_boundaries(ScaleSpeed(model)); }

/// Central-difference step used by generator_apply.
inline double fd_step(double x) { return std::max(1e-5, 1e-5 * std::abs(x)); }

/// A f(x) = sigma^2/2 f'' + mu f' with analytic derivatives supplied.
inline double generator_apply(const DiffusionModel& model, double x, double fp, double fpp) {
    double sg = model.diffusion(x);
    return 0.5 * sg * sg * fpp + model.drift(x) * fp;
}

/// A f(x) by central differences of f.
template <class F>
double generator_apply(const DiffusionModel& model, F&& f, double x, double h = 0.0) {
    if (h <= 0.0) h = fd_step(x);
    if (!(x - h > model.left && x + h < model.right))
        throw DomainError("generator_apply: difference stencil leaves the state space at x=" + std::to_string(x));
    const double f0 = f(x), fm = f(x - h), fp = f(x + h);
    return generator_apply(model, x, (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / (h * h));
}

/// A f(x) given f' analytically; f'' by central differences of f'.
template <class FP>
double generator_apply_from_derivative(const DiffusionModel& model, FP&& fprime, double x, double h = 0.0) {
    if (h <= 0.0) h = fd_step(x);
    if (!(x - h > model.left && x + h < model.right))
        throw DomainError("generator_apply: difference stencil leaves the state space at x=" + std::to_string(x));
    return generator_apply(model, x, fprime(x), (fprime(x + h) - fprime(x - h)) / (2 * h));
}

}  // namespace sspolicy
