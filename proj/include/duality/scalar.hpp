#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

/// One-dimensional solvers: golden-section minimization with optional
/// derivative polish, bracket expansion, and a safeguarded root finder.
/// All routines are deterministic and allocation-free.

namespace duality {

struct ScalarMin {
    double x;
    double fx;
    int iterations;
};

/// Golden-section search on [a, b]. f may return +inf inside the bracket;
/// such points are treated as worse than any finite value.
template <typename F>
ScalarMin golden_section_min(F&& f, double a, double b, double xtol = 1e-12,
                             int max_iter = 400) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    int it = 0;
    while ((b - a) > xtol * (1.0 + std::fabs(a) + std::fabs(b)) && it < max_iter) {
        if (std::isinf(f1) && std::isinf(f2) && f1 > 0.0 && f2 > 0.0) {
            // No ordering information; assume the finite basin sits between
            // infinite walls and shrink both edges.
            a = x1;
            b = x2;
            x1 = b - phi * (b - a);
            x2 = a + phi * (b - a);
            f1 = f(x1);
            f2 = f(x2);
            ++it;
            continue;
        }
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
        ++it;
    }
    double xm = 0.5 * (a + b);
    return {xm, f(xm), it};
}

/// Newton polish for a critical point of f given fp = f', starting at x0 and
/// clamped to [lo, hi]. Falls back to the start point if Newton leaves the
/// interval or the second-difference curvature degenerates.
template <typename Fp>
double newton_polish(Fp&& fp, double x0, double lo, double hi,
                     double tol = 1e-13, int max_iter = 60) {
    double x = x0;
    for (int i = 0; i < max_iter; ++i) {
        double g = fp(x);
        double h = std::max(1e-7 * (1.0 + std::fabs(x)), 1e-9);
        double g2 = (fp(x + h) - fp(x - h)) / (2.0 * h);
        if (!std::isfinite(g) || !std::isfinite(g2) || std::fabs(g2) < 1e-300) break;
        double step = g / g2;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) break;
        x = xn;
        if (std::fabs(step) < tol * (1.0 + std::fabs(x))) break;
    }
    return x;
}

/// Expands [a, b] geometrically to the right until pred(b) holds.
/// Returns false if the cap is reached first.
template <typename P>
bool expand_upper(P&& pred, double& b, double cap, double factor = 4.0) {
    while (!pred(b)) {
        if (b >= cap) return false;
        b = std::min(b * factor, cap);
    }
    return true;
}

/// Safeguarded root finder (bisection with secant acceleration) for a
/// continuous sign-changing f on [a, b]. Requires f(a), f(b) of opposite sign.
template <typename F>
double find_root(F&& f, double a, double b, double xtol = 1e-14, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (!(fa * fb < 0.0)) throw std::invalid_argument("find_root: no sign change");
    for (int i = 0; i < max_iter; ++i) {
        double m = 0.5 * (a + b);
        // secant candidate, accepted only if strictly interior
        double s = m;
        if (std::isfinite(fa) && std::isfinite(fb) && fb != fa) {
            double sec = b - fb * (b - a) / (fb - fa);
            if (sec > std::min(a, b) + 0.25 * std::fabs(b - a) * 1e-3 &&
                sec < std::max(a, b) - 0.25 * std::fabs(b - a) * 1e-3)
                s = sec;
        }
        double fs = f(s);
        if (fs == 0.0) return s;
        if (fa * fs < 0.0) { b = s; fb = fs; }
        else { a = s; fa = fs; }
        if (std::fabs(b - a) < xtol * (1.0 + std::fabs(a) + std::fabs(b))) break;
    }
    return 0.5 * (a + b);
}

}  // namespace duality
