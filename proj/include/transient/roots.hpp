#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "transient/errors.hpp"

namespace transient::roots {

struct Options {
    double x_tol = 1e-15;     // relative bracket width
    double f_tol = 1e-14;     // absolute residual
    int max_iterations = 300;
};

/// Root of `f` inside [lo, hi] where f(lo) and f(hi) have opposite signs.
/// Newton steps (derivative `df`) are accepted only while they stay inside
/// the current bracket and halve the residual; otherwise the step bisects.
template <class F, class DF>
double bracketed_newton(F&& f, DF&& df, double lo, double hi, const Options& opt = {}) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) {
        throw NoSolutionError("bracketed_newton: no sign change on bracket");
    }
    // Orient so that f(lo) < 0 < f(hi).
    if (flo > 0.0) std::swap(lo, hi);

    double x = 0.5 * (lo + hi);
    double fx = f(x);
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (std::abs(fx) <= opt.f_tol) return x;
        if (fx < 0.0) lo = x; else hi = x;
        const double width = std::abs(hi - lo);
        if (width <= opt.x_tol * (1.0 + std::abs(x))) return x;

        double next = 0.5 * (lo + hi);
        const double slope = df(x);
        if (std::isfinite(slope) && slope != 0.0) {
            const double candidate = x - fx / slope;
            const double a = std::min(lo, hi);
            const double b = std::max(lo, hi);
            if (candidate > a && candidate < b) next = candidate;
        }
        double fnext = f(next);
        if (next != 0.5 * (lo + hi) && std::abs(fnext) > 0.5 * std::abs(fx)) {
            // Newton stalled; fall back to bisection for this iteration.
            if (fnext < 0.0) lo = next; else hi = next;
            next = 0.5 * (lo + hi);
            fnext = f(next);
        }
        x = next;
        fx = fnext;
    }
    return x;
}

/// Root of a strictly increasing `f` on (lo, hi_limit) with f(lo) <= 0.
/// The upper end of the bracket is grown from `guess` towards `hi_limit`
/// (which may be +inf) until the sign changes.
template <class F, class DF>
double increasing_root(F&& f, DF&& df, double lo, double hi_limit, double guess,
                       const Options& opt = {}) {
    if (!(guess > lo)) guess = lo + 1.0;
    // hi_limit is an open end: the bracket approaches it but never reaches it.
    double hi = std::isfinite(hi_limit) ? std::min(guess, lo + 0.5 * (hi_limit - lo)) : guess;
    for (int grow = 0; grow < 200; ++grow) {
        if (f(hi) >= 0.0) return bracketed_newton(f, df, lo, hi, opt);
        if (std::isfinite(hi_limit)) {
            const double next = hi + 0.5 * (hi_limit - hi);
            if (!(next < hi_limit) || next == hi) break;
            hi = next;
        } else {
            hi = lo + 2.0 * (hi - lo);
        }
    }
    throw NoSolutionError("increasing_root: target exceeds the attainable range");
}

} // namespace transient::roots
