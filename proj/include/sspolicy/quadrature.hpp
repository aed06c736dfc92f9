#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sspolicy/extended_real.hpp"

namespace sspolicy::quad {

using Fn = std::function<double(double)>;

struct Options {
    double rel_tol = 1e-13;
    unsigned max_depth = 18;
};

namespace detail {

/// One Kronrod panel on [lo,hi]; the rule is applied on [-1,1] so the error
/// estimate is on the same scale as the value.
template <class F>
double kronrod_panel(F& f, double lo, double hi, double& err) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    auto g = [&](double t) { return f(mid + half * t); };
    double e = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, -1.0, 1.0, 0, 0.0, &e);
    err = std::abs(half) * e;
    return half * v;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval: the panel
/// with the largest error is bisected until the summed error is below
/// rel_tol times the current total, or 2^max_depth panels are in use.
template <class F>
double integrate(F&& f, double lo, double hi, const Options& opt = {}, double* err = nullptr) {
    if (lo == hi) {
        if (err) *err = 0.0;
        return 0.0;
    }
    struct Panel {
        double lo, hi, v, e;
        bool operator<(const Panel& o) const { return e < o.e; }
    };
    std::priority_queue<Panel> heap;
    double e0 = 0.0;
    double total = detail::kronrod_panel(f, lo, hi, e0), total_err = e0;
    heap.push({lo, hi, total, e0});
    const size_t max_panels = size_t(1) << std::min(opt.max_depth, 14u);
    while (heap.size() < max_panels && std::isfinite(total) && total_err > opt.rel_tol * std::abs(total) &&
           total_err > 0.0) {
        Panel p = heap.top();
        const double mid = 0.5 * (p.lo + p.hi);
        if (mid == p.lo || mid == p.hi) break;
        heap.pop();
        double el = 0.0, er = 0.0;
        double vl = detail::kronrod_panel(f, p.lo, mid, el), vr = detail::kronrod_panel(f, mid, p.hi, er);
        total += vl + vr - p.v;
        total_err += el + er - p.e;
        heap.push({p.lo, mid, vl, el});
        heap.push({mid, p.hi, vr, er});
        if (total_err <= opt.rel_tol * std::abs(total) || heap.size() % 64 == 0) {
            // resum to remove drift from the running updates
            auto copy = heap;
            total = 0.0;
            total_err = 0.0;
            for (; !copy.empty(); copy.pop()) {
                total += copy.top().v;
                total_err += copy.top().e;
            }
        }
    }
    if (err) *err = total_err;
    return total;
}

struct WalkOptions {
    double rel_tol = 1e-13;
    int max_segments = 600;
    /// Number of consecutive non-decreasing increments that certifies divergence.
    int divergence_run = 40;
    double divergence_bound = 1e12;
    /// Width of the first segment toward an infinite end (defaults to max(1,|x0|)).
    double first_width = 0.0;
    unsigned max_depth = 18;
};

/// Diagnostic trace of an improper integral walk.
struct WalkTrace {
    std::vector<double> partial_sums;
    int segments = 0;
    bool extrapolated = false;
};

namespace detail {

/// Generates segment breakpoints walking from x0 toward `end`.
class SegmentWalker {
public:
    SegmentWalker(double x0, double end, double first_width)
        : x0_(x0), end_(end), cur_(x0), dir_(end > x0 ? 1.0 : -1.0), infinite_(std::isinf(end)) {
        width_ = first_width > 0 ? first_width : std::max(1.0, std::abs(x0));
    }

    /// Next breakpoint; returns false when floating point resolution is exhausted.
    bool next(double& lo, double& hi) {
        double nxt;
        if (infinite_) {
            nxt = cur_ + dir_ * width_;
            width_ *= 2.0;
            if (!std::isfinite(nxt)) return false;
        } else {
            nxt = cur_ + 0.5 * (end_ - cur_);
            if (nxt == cur_ || nxt == end_) return false;
        }
        lo = std::min(cur_, nxt);
        hi = std::max(cur_, nxt);
        cur_ = nxt;
        return true;
    }

    double position() const { return cur_; }

private:
    double x0_, end_, cur_, dir_;
    bool infinite_;
    double width_ = 1.0;
};

/// Accumulates segment increments and decides convergence or divergence.
class Accumulator {
public:
    explicit Accumulator(const WalkOptions& opt) : opt_(opt) {}

    enum class State { running, converged, diverged, indeterminate };

    State add(double inc) {
        if (std::isnan(inc)) return state_ = State::indeterminate;
        if (std::isinf(inc)) return state_ = State::diverged;
        sum_ += inc;
        trace_.partial_sums.push_back(sum_);
        ++trace_.segments;
        if (!std::isfinite(sum_)) return state_ = State::diverged;
        double a = std::abs(inc);
        if (a == 0.0) {
            if (++zero_run_ >= 3) return state_ = State::converged;
            prev_ = a;
            return state_;
        }
        zero_run_ = 0;
        if (prev_ > 0.0) {
            double q = a / prev_;
            if (q >= 1.0 - 1e-9) {
                ++nondecreasing_run_;
            } else {
                nondecreasing_run_ = 0;
            }
            if (nondecreasing_run_ >= 1 && std::abs(sum_) > opt_.divergence_bound) return state_ = State::diverged;
            if (nondecreasing_run_ >= opt_.divergence_run) return state_ = State::diverged;
            if (a <= opt_.rel_tol * std::abs(sum_)) {
                if (++small_run_ >= 2) return state_ = State::converged;
            } else {
                small_run_ = 0;
            }
            if (q < 0.97 && prev_q_ > 0.0 && std::abs(q - prev_q_) <= 0.02 * prev_q_) {
                double tail = inc * q / (1.0 - q);
                if (std::abs(tail) <= opt_.rel_tol * std::abs(sum_)) {
                    sum_ += tail;
                    trace_.extrapolated = true;
                    return state_ = State::converged;
                }
            }
            prev_q_ = q;
        }
        prev_ = a;
        return state_;
    }

    /// Called when the walk runs out of representable breakpoints.
    State finish_exhausted() {
        if (state_ != State::running) return state_;
        if (nondecreasing_run_ >= 3) return state_ = State::diverged;
        if (prev_q_ > 0.0 && prev_q_ < 0.97) {
            sum_ += prev_ * prev_q_ / (1.0 - prev_q_) * (sum_ >= 0 ? 1.0 : -1.0);
            trace_.extrapolated = true;
            return state_ = State::converged;
        }
        if (prev_ <= 1e-10 * std::abs(sum_)) return state_ = State::converged;
        return state_ = State::indeterminate;
    }

    double sum() const { return sum_; }
    State state() const { return state_; }
    const WalkTrace& trace() const { return trace_; }

private:
    WalkOptions opt_;
    State state_ = State::running;
    double sum_ = 0.0;
    double prev_ = 0.0;
    double prev_q_ = 0.0;
    int nondecreasing_run_ = 0;
    int small_run_ = 0;
    int zero_run_ = 0;
    WalkTrace trace_;
};

/// Integrand finite at both ends and the midpoint of a segment.
template <class F>
bool finite_on(F& f, double lo, double hi) {
    return std::isfinite(f(lo)) && std::isfinite(f(hi)) && std::isfinite(f(0.5 * (lo + hi)));
}

inline ExtReal to_ext(const Accumulator& acc) {
    switch (acc.state()) {
    case Accumulator::State::converged: return ExtReal::finite(acc.sum());
    case Accumulator::State::diverged: return ExtReal::infinity();
    default: return ExtReal::indeterminate(acc.sum());
    }
}

}  // namespace detail

/// Integral of f over the interval between x0 and `end`, where `end` may be
/// infinite or a finite endpoint at which f is singular. Returns +inf when
/// divergence is certified and indeterminate when neither verdict is reached.
template <class F>
ExtReal integrate_toward(F&& f, double x0, double end, const WalkOptions& opt = {}, WalkTrace* trace = nullptr) {
    if (x0 == end) return ExtReal::finite(0.0);
    detail::SegmentWalker walker(x0, end, opt.first_width);
    detail::Accumulator acc(opt);
    Options seg{opt.rel_tol, opt.max_depth};
    double lo = 0, hi = 0;
    for (int k = 0; k < opt.max_segments; ++k) {
        if (!walker.next(lo, hi)) {
            acc.finish_exhausted();
            break;
        }
        if (!detail::finite_on(f, lo, hi)) {
            acc.add(std::numeric_limits<double>::infinity());
            break;
        }
        if (acc.add(integrate(f, lo, hi, seg)) != detail::Accumulator::State::running) break;
    }
    if (acc.state() == detail::Accumulator::State::running) acc.finish_exhausted();
    if (trace) *trace = acc.trace();
    return detail::to_ext(acc);
}

/// Nested integral  \int outer(u) * J(u) du  over the interval between x0 and
/// `end`, with J(u) = \int inner over the interval between x0 and u.
template <class F, class G>
ExtReal integrate_nested_toward(F&& outer, G&& inner, double x0, double end, const WalkOptions& opt = {},
                                WalkTrace* trace = nullptr) {
    if (x0 == end) return ExtReal::finite(0.0);
    detail::SegmentWalker walker(x0, end, opt.first_width);
    detail::Accumulator acc(opt);
    Options seg{opt.rel_tol * 10, 12};
    double j_start = 0.0;
    double lo = 0, hi = 0;
    const bool forward = end > x0;
    for (int k = 0; k < opt.max_segments; ++k) {
        if (!walker.next(lo, hi)) {
            acc.finish_exhausted();
            break;
        }
        if (!detail::finite_on(outer, lo, hi) || !detail::finite_on(inner, lo, hi)) {
            acc.add(std::numeric_limits<double>::infinity());
            break;
        }
        const double base = forward ? lo : hi;
        auto integrand = [&](double u) {
            double o = outer(u);
            if (o == 0.0) return 0.0;
            double j = j_start + (forward ? integrate(inner, base, u, seg) : integrate(inner, u, base, seg));
            return o * j;
        };
        double inc = integrate(integrand, lo, hi, seg);
        j_start += integrate(inner, lo, hi, seg);
        if (!std::isfinite(j_start)) {
            acc.add(std::numeric_limits<double>::infinity());
            break;
        }
        if (acc.add(inc) != detail::Accumulator::State::running) break;
    }
    if (acc.state() == detail::Accumulator::State::running) acc.finish_exhausted();
    if (trace) *trace = acc.trace();
    return detail::to_ext(acc);
}

}  // namespace sspolicy::quad
