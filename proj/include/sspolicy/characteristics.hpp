#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sspolicy/costs.hpp"
#include "sspolicy/diffusion.hpp"

namespace sspolicy {

/// g0 and zeta with their derivatives. Differences of g0 (resp. zeta) give the
/// expected holding cost (resp. expected time) for the diffusion to fall from z to y.
struct Characteristics {
    enum class Mode { closed_form, quadrature, imported };

    Mode mode = Mode::closed_form;
    double anchor = 0.0;
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    bool leftAttainable = false;

    RealFn g0, zeta, g0_prime, zeta_prime;
    /// Optional exact second derivatives.
    RealFn g0_second_exact, zeta_second_exact;

    double g0_second(double x) const {
        if (g0_second_exact) return g0_second_exact(x);
        double h = fd_step(x);
        return (g0_prime(x + h) - g0_prime(x - h)) / (2 * h);
    }
    double zeta_second(double x) const {
        if (zeta_second_exact) return zeta_second_exact(x);
        double h = fd_step(x);
        return (zeta_prime(x + h) - zeta_prime(x - h)) / (2 * h);
    }

    /// Whether y may be placed at the left boundary itself.
    bool admits(double y) const { return y > left || (y == left && leftAttainable); }
};

inline const char* to_string(Characteristics::Mode m) {
    switch (m) {
    case Characteristics::Mode::closed_form: return "closed-form";
    case Characteristics::Mode::quadrature: return "quadrature-tabulated";
    default: return "imported";
    }
}

struct GridConfig {
    /// Half width of the tabulated window around the anchor, in domain-map units.
    double half_width = 12.0;
    int cells = 480;
    /// Interpolation probe tolerance; the grid is doubled until it is met.
    double probe_tol = 1e-6;
    int max_doublings = 2;
};

/// Cubic Hermite interpolation on [x0,x1].
inline double hermite(double x0, double x1, double f0, double f1, double d0, double d1, double x) {
    const double h = x1 - x0, t = (x - x0) / h, t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
}
inline double hermite_derivative(double x0, double x1, double f0, double f1, double d0, double d1, double x) {
    const double h = x1 - x0, t = (x - x0) / h, t2 = t * t;
    return ((6 * t2 - 6 * t) * f0 + (-6 * t2 + 6 * t) * f1) / h + (3 * t2 - 4 * t + 1) * d0 + (3 * t2 - 2 * t) * d1;
}

/// Quintic Hermite interpolation using values, first and second derivatives.
inline double hermite5(double x0, double x1, double f0, double f1, double d0, double d1, double s0, double s1,
                       double x) {
    const double h = x1 - x0, t = (x - x0) / h, t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h10 = t - 6 * t3 + 8 * t4 - 3 * t5,
                 h20 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5), h21 = 0.5 * (t3 - 2 * t4 + t5),
                 h11 = -4 * t3 + 7 * t4 - 3 * t5, h01 = 10 * t3 - 15 * t4 + 6 * t5;
    return h00 * f0 + h10 * h * d0 + h20 * h * h * s0 + h21 * h * h * s1 + h11 * h * d1 + h01 * f1;
}

namespace detail {

/// Quadrature-built table of g0 and zeta. Uses the stabilised kernels
/// K_c(x) = s(x) \int_x^b c0 dM, K_1(x) = s(x) M[x,b) so that g0' = 2 K_c and
/// zeta' = 2 K_1 stay representable even where s over- or underflows.
class CharTable {
public:
    CharTable(std::shared_ptr<const ScaleSpeed> ss, RealFn c0, const BoundaryReport& br, const GridConfig& grid)
        : ss_(std::move(ss)), c0_(std::move(c0)) {
        const auto& m = ss_->model();
        left_attainable_ = br.leftAttainable && std::isfinite(m.left);
        GridConfig g = grid;
        for (int attempt = 0;; ++attempt) {
            build(g);
            if (attempt >= grid.max_doublings || probe_error() <= grid.probe_tol) break;
            g.cells *= 2;
        }
    }

    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& g0_nodes() const { return g0_; }
    const std::vector<double>& zeta_nodes() const { return z_; }
    double g0_prime_node(size_t i) const { return 2 * kc_[i]; }
    double zeta_prime_node(size_t i) const { return 2 * k1_[i]; }
    double max_probe_error() const { return probe_err_; }

    /// kernel  s(x) \int_x^b w dM  with weight w = c0 (which=0) or 1 (which=1)
    double kernel(double x, int which) const {
        const auto& m = ss_->model();
        if (!(x > m.left && x < m.right)) {
            if (x == m.left && left_attainable_) return which == 0 ? kc_.front() : k1_.front();
            throw DomainError("characteristics: x outside state space");
        }
        const auto& K = which == 0 ? kc_ : k1_;
        size_t n = x_.size();
        if (x >= x_.back()) return tail_kernel(x, which);
        size_t j = static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        size_t up = std::min(j, n - 1);
        double base = K[up] * std::exp(-ss_->log_scale_increment(x, x_[up]));
        return base + local_integral(x, x_[up], which);
    }

    double g0_prime(double x) const { return 2 * kernel(x, 0); }
    double zeta_prime(double x) const { return 2 * kernel(x, 1); }

    double value(double x, int which) const {
        const auto& V = which == 0 ? g0_ : z_;
        const auto& K = which == 0 ? kc_ : k1_;
        if (x >= x_.front() && x <= x_.back()) {
            size_t j = static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
            if (j >= x_.size()) j = x_.size() - 1;
            size_t i = j - 1;
            return hermite5(x_[i], x_[j], V[i], V[j], 2 * K[i], 2 * K[j], second(i, which), second(j, which), x);
        }
        // outside the table: integrate the derivative from the nearest end
        auto d = [&](double u) { return 2 * kernel(u, which); };
        if (x < x_.front()) return V.front() - quad::integrate(d, x, x_.front(), quad::Options{1e-11, 14});
        return V.back() + quad::integrate(d, x_.back(), x, quad::Options{1e-11, 14});
    }

    /// Value by direct quadrature from the nearest node (no interpolation).
    double value_exact(double x, int which) const {
        const auto& V = which == 0 ? g0_ : z_;
        if (x < x_.front() || x > x_.back()) return value(x, which);
        size_t j = static_cast<size_t>(std::lower_bound(x_.begin(), x_.end(), x) - x_.begin());
        if (j >= x_.size()) j = x_.size() - 1;
        auto d = [&](double u) { return 2 * kernel(u, which); };
        return V[j] - quad::integrate(d, x, x_[j], quad::Options{1e-11, 14});
    }

private:
    double weight(double v, int which) const { return which == 0 ? c0_(v) : 1.0; }

    /// Second derivative at node i from K' = -(2 mu / sigma^2) K - w / sigma^2.
    double second(size_t i, int which) const {
        const auto& m = ss_->model();
        const double x = x_[i], sg = m.diffusion(x), s2 = sg * sg;
        const double k = which == 0 ? kc_[i] : k1_[i];
        return 2 * (-2 * m.drift(x) / s2 * k - weight(x, which) / s2);
    }

    /// \int_x^{x1} w(v) exp(L(x)-L(v)) / sigma^2(v) dv
    double local_integral(double x, double x1, int which) const {
        if (x == x1) return 0.0;
        const auto& m = ss_->model();
        auto f = [&](double v) {
            double sg = m.diffusion(v);
            return weight(v, which) * std::exp(-ss_->log_scale_increment(x, v)) / (sg * sg);
        };
        return quad::integrate(f, x, x1, quad::Options{1e-13, 10});
    }

    double tail_kernel(double x, int which) const {
        const auto& m = ss_->model();
        auto f = [&](double v) {
            double sg = m.diffusion(v);
            return weight(v, which) * std::exp(-ss_->log_scale_increment(x, v)) / (sg * sg);
        };
        quad::WalkOptions wo = ss_->walk_options();
        wo.rel_tol = 1e-13;
        wo.first_width = tail_width_;
        ExtReal r = quad::integrate_toward(f, x, m.right, wo);
        if (!r.is_finite())
            throw DomainError("characteristics: integral toward the right boundary does not converge (" +
                              r.to_string() + ")");
        return r.value();
    }

    void build(const GridConfig& g) {
        const auto& m = ss_->model();
        const auto& map = ss_->map();
        const double uc = map.to_u(m.anchor);
        const int half = g.cells / 2;
        const double h = g.half_width / half;
        x_.clear();
        if (left_attainable_) x_.push_back(m.left);
        for (int i = -half; i <= half; ++i) {
            double x = i == 0 ? m.anchor : map.to_x(uc + h * i);
            if (!m.interior(x)) continue;
            if (!x_.empty() && x <= x_.back()) continue;
            x_.push_back(x);
        }
        const size_t n = x_.size();
        anchor_index_ = static_cast<size_t>(std::find(x_.begin(), x_.end(), m.anchor) - x_.begin());
        tail_width_ = x_[n - 1] - x_[n - 2];

        kc_.assign(n, 0.0);
        k1_.assign(n, 0.0);
        kc_[n - 1] = tail_kernel(x_[n - 1], 0);
        k1_[n - 1] = tail_kernel(x_[n - 1], 1);
        for (size_t i = n - 1; i-- > 0;) {
            if (i == 0 && left_attainable_) {
                // kernel at the attainable boundary: limit from the first interior node
                kc_[0] = limit_kernel(0);
                k1_[0] = limit_kernel(1);
                continue;
            }
            double decay = std::exp(-ss_->log_scale_increment(x_[i], x_[i + 1]));
            kc_[i] = kc_[i + 1] * decay + local_integral(x_[i], x_[i + 1], 0);
            k1_[i] = k1_[i + 1] * decay + local_integral(x_[i], x_[i + 1], 1);
        }
        g0_.assign(n, 0.0);
        z_.assign(n, 0.0);
        for (size_t i = anchor_index_; i + 1 < n; ++i) {
            g0_[i + 1] = g0_[i] + cell_integral(i, 0);
            z_[i + 1] = z_[i] + cell_integral(i, 1);
        }
        for (size_t i = anchor_index_; i-- > 0;) {
            g0_[i] = g0_[i + 1] - cell_integral(i, 0);
            z_[i] = z_[i + 1] - cell_integral(i, 1);
        }
    }

    double limit_kernel(int which) const {
        // s(a) \int_a^b w dM, evaluated by shrinking toward a; the kernel is continuous there
        const auto& m = ss_->model();
        double x1 = x_[1];
        const auto& K = which == 0 ? kc_ : k1_;
        double xa = m.left + 1e-12 * (x1 - m.left);
        return K[1] * std::exp(-ss_->log_scale_increment(xa, x1)) + local_integral(xa, x1, which);
    }

    double cell_integral(size_t i, int which) const {
        const auto& K = which == 0 ? kc_ : k1_;
        const double x0 = x_[i], x1 = x_[i + 1];
        auto f = [&](double u) {
            if (u >= x1) return 2 * K[i + 1];
            return 2 * (K[i + 1] * std::exp(ss_->log_scale_increment(x1, u)) + local_integral(u, x1, which));
        };
        return quad::integrate(f, x0, x1, quad::Options{1e-11, 10});
    }

    double probe_error() {
        probe_err_ = 0.0;
        const size_t n = x_.size();
        const size_t stride = std::max<size_t>(1, n / 24);
        for (size_t i = 0; i + 1 < n; i += stride) {
            const double mid = 0.5 * (x_[i] + x_[i + 1]);
            for (int which = 0; which < 2; ++which) {
                const auto& V = which == 0 ? g0_ : z_;
                const auto& K = which == 0 ? kc_ : k1_;
                double interp = hermite5(x_[i], x_[i + 1], V[i], V[i + 1], 2 * K[i], 2 * K[i + 1], second(i, which),
                                         second(i + 1, which), mid);
                auto d = [&](double u) { return 2 * kernel(u, which); };
                double exact = V[i] + quad::integrate(d, x_[i], mid, quad::Options{1e-11, 12});
                double scale = std::max({std::abs(exact), std::abs(V[i]), std::abs(V[i + 1]), 1e-300});
                probe_err_ = std::max(probe_err_, std::abs(interp - exact) / scale);
            }
        }
        return probe_err_;
    }

    std::shared_ptr<const ScaleSpeed> ss_;
    RealFn c0_;
    bool left_attainable_ = false;
    std::vector<double> x_, kc_, k1_, g0_, z_;
    size_t anchor_index_ = 0;
    double tail_width_ = 1.0;
    double probe_err_ = 0.0;
};

}  // namespace detail

/// Builds g0 and zeta by quadrature from the model's scale and speed densities.
inline Characteristics build_characteristics(std::shared_ptr<const ScaleSpeed> ss, const CostModel& costs,
                                             const BoundaryReport& br, const GridConfig& grid = {}) {
    auto table = std::make_shared<detail::CharTable>(ss, costs.c0, br, grid);
    const auto& m = ss->model();
    Characteristics ch;
    ch.mode = Characteristics::Mode::quadrature;
    ch.anchor = m.anchor;
    ch.left = m.left;
    ch.right = m.right;
    ch.leftAttainable = br.leftAttainable && std::isfinite(m.left);
    ch.g0 = [table](double x) { return table->value(x, 0); };
    ch.zeta = [table](double x) { return table->value(x, 1); };
    ch.g0_prime = [table](double x) { return table->g0_prime(x); };
    ch.zeta_prime = [table](double x) { return table->zeta_prime(x); };
    return ch;
}

inline Characteristics build_characteristics(const DiffusionModel& model, const CostModel& costs,
                                             const GridConfig& grid = {}) {
    auto ss = std::make_shared<const ScaleSpeed>(model);
    return build_characteristics(ss, costs, classify_boundaries(*ss), grid);
}

/// Expected cost and length of one ordering cycle from z down to y: (Bg0, Bzeta).
inline std::pair<double, double> expected_cycle(const Characteristics& ch, double y, double z) {
    if (!(ch.admits(y) && y < z && z < ch.right)) throw DomainError("expected_cycle: need a < y < z < b");
    return {ch.g0(z) - ch.g0(y), ch.zeta(z) - ch.zeta(y)};
}

/// Writes the characteristics on the given points as CSV (x,g0,zeta,g0',zeta').
inline void export_characteristics_csv(const Characteristics& ch, const std::vector<double>& xs, std::ostream& os) {
    os << "x,g0,zeta,g0_prime,zeta_prime\n";
    char buf[160];
    for (double x : xs) {
        std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%.16e,%.16e\n", x, ch.g0(x), ch.zeta(x), ch.g0_prime(x),
                      ch.zeta_prime(x));
        os << buf;
    }
}

/// Reads a table written by export_characteristics_csv; values between nodes
/// are Hermite interpolated.
inline Characteristics import_characteristics_csv(std::istream& is, double anchor, double left, double right,
                                                  bool left_attainable = false) {
    struct Row {
        double x, g, z, gp, zp;
    };
    auto rows = std::make_shared<std::vector<Row>>();
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        Row r{};
        if (!(ls >> r.x >> r.g >> r.z >> r.gp >> r.zp)) throw std::runtime_error("characteristics CSV: bad row");
        rows->push_back(r);
    }
    if (rows->size() < 2) throw std::runtime_error("characteristics CSV: need at least two rows");
    std::sort(rows->begin(), rows->end(), [](const Row& a, const Row& b) { return a.x < b.x; });
    auto locate = [rows](double x) {
        auto it = std::upper_bound(rows->begin(), rows->end(), x, [](double v, const Row& r) { return v < r.x; });
        size_t j = std::clamp<size_t>(static_cast<size_t>(it - rows->begin()), 1, rows->size() - 1);
        return j;
    };
    Characteristics ch;
    ch.mode = Characteristics::Mode::imported;
    ch.anchor = anchor;
    ch.left = left;
    ch.right = right;
    ch.leftAttainable = left_attainable;
    auto interp = [rows, locate](bool g, bool deriv) {
        return [rows, locate, g, deriv](double x) {
            size_t j = locate(x);
            const Row& a = (*rows)[j - 1];
            const Row& b = (*rows)[j];
            double f0 = g ? a.g : a.z, f1 = g ? b.g : b.z, d0 = g ? a.gp : a.zp, d1 = g ? b.gp : b.zp;
            return deriv ? hermite_derivative(a.x, b.x, f0, f1, d0, d1, x) : hermite(a.x, b.x, f0, f1, d0, d1, x);
        };
    };
    ch.g0 = interp(true, false);
    ch.zeta = interp(false, false);
    ch.g0_prime = interp(true, true);
    ch.zeta_prime = interp(false, true);
    return ch;
}

}  // namespace sspolicy
