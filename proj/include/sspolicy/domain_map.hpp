#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sspolicy {

/// Smooth increasing bijection between an open interval (a,b) and the real line.
/// Used to place tabulation nodes, to reparameterise the optimisation domain
/// and to measure proximity to a boundary.
class DomainMap {
public:
    enum class Kind { identity, log_left, log_right, logit };

    DomainMap() = default;
    DomainMap(double a, double b, double scale = 1.0) : a_(a), b_(b), scale_(scale) {
        if (!(a < b)) throw std::invalid_argument("DomainMap: need a < b");
        const bool fa = std::isfinite(a), fb = std::isfinite(b);
        if (!fa && !fb) kind_ = Kind::identity;
        else if (fa && !fb) kind_ = Kind::log_left;
        else if (!fa && fb) kind_ = Kind::log_right;
        else kind_ = Kind::logit;
    }

    Kind kind() const { return kind_; }
    double left() const { return a_; }
    double right() const { return b_; }
    double scale() const { return scale_; }

    double to_u(double x) const {
        switch (kind_) {
        case Kind::identity: return x / scale_;
        case Kind::log_left: return std::log((x - a_) / scale_);
        case Kind::log_right: return -std::log((b_ - x) / scale_);
        default: return std::log(x - a_) - std::log(b_ - x);
        }
    }

    double to_x(double u) const {
        switch (kind_) {
        case Kind::identity: return u * scale_;
        case Kind::log_left: return a_ + scale_ * std::exp(u);
        case Kind::log_right: return b_ - scale_ * std::exp(-u);
        default: {
            // logistic, written to stay accurate at both ends
            if (u >= 0) {
                double e = std::exp(-u);
                return (b_ + a_ * e) / (1.0 + e);
            }
            double e = std::exp(u);
            return (a_ + b_ * e) / (1.0 + e);
        }
        }
    }

    /// dx/du
    double jacobian(double u) const {
        switch (kind_) {
        case Kind::identity: return scale_;
        case Kind::log_left: return scale_ * std::exp(u);
        case Kind::log_right: return scale_ * std::exp(-u);
        default: {
            double e = std::exp(-std::abs(u));
            return (b_ - a_) * e / ((1.0 + e) * (1.0 + e));
        }
        }
    }

    /// Dimensionless closeness to the left (resp. right) boundary; small means near.
    double left_proximity(double x) const {
        if (std::isfinite(a_)) return (x - a_) / scale_;
        return x >= 0 ? std::numeric_limits<double>::infinity() : scale_ / std::abs(x);
    }
    double right_proximity(double x) const {
        if (std::isfinite(b_)) return (b_ - x) / scale_;
        return x <= 0 ? std::numeric_limits<double>::infinity() : scale_ / std::abs(x);
    }

private:
    Kind kind_ = Kind::identity;
    double a_ = -std::numeric_limits<double>::infinity();
    double b_ = std::numeric_limits<double>::infinity();
    double scale_ = 1.0;
};

}  // namespace sspolicy
