#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace sspolicy {

/// A value on the extended half-line [0, +inf] that may also be
/// "indeterminate" when a numerical procedure could not certify either
/// convergence or divergence.
class ExtReal {
public:
    enum class Kind { finite, pos_infinity, indeterminate };

    constexpr ExtReal() = default;
    static constexpr ExtReal finite(double v) { return ExtReal(Kind::finite, v); }
    static constexpr ExtReal infinity() {
        return ExtReal(Kind::pos_infinity, std::numeric_limits<double>::infinity());
    }
    static constexpr ExtReal indeterminate(double partial = std::numeric_limits<double>::quiet_NaN()) {
        return ExtReal(Kind::indeterminate, partial);
    }

    constexpr Kind kind() const { return kind_; }
    constexpr bool is_finite() const { return kind_ == Kind::finite; }
    constexpr bool is_infinite() const { return kind_ == Kind::pos_infinity; }
    constexpr bool is_indeterminate() const { return kind_ == Kind::indeterminate; }

    /// Finite value, +inf, or (for indeterminate) the last partial sum.
    constexpr double value() const { return value_; }

    friend ExtReal operator+(ExtReal lhs, ExtReal rhs) {
        if (lhs.is_indeterminate() || rhs.is_indeterminate()) return indeterminate();
        if (lhs.is_infinite() || rhs.is_infinite()) return infinity();
        return finite(lhs.value_ + rhs.value_);
    }

    std::string to_string() const {
        switch (kind_) {
        case Kind::finite: return std::to_string(value_);
        case Kind::pos_infinity: return "inf";
        default: return "indeterminate";
        }
    }

    friend std::ostream& operator<<(std::ostream& os, const ExtReal& v) { return os << v.to_string(); }

private:
    constexpr ExtReal(Kind k, double v) : kind_(k), value_(v) {}

    Kind kind_ = Kind::finite;
    double value_ = 0.0;
};

/// Three-valued verdict used by numerical certification checks.
enum class TriState { pass, fail, indeterminate };

inline const char* to_string(TriState t) {
    switch (t) {
    case TriState::pass: return "pass";
    case TriState::fail: return "fail";
    default: return "indeterminate";
    }
}

inline TriState tri_and(TriState a, TriState b) {
    if (a == TriState::fail || b == TriState::fail) return TriState::fail;
    if (a == TriState::indeterminate || b == TriState::indeterminate) return TriState::indeterminate;
    return TriState::pass;
}

}  // namespace sspolicy
