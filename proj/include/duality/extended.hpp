#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

/// Extended-real helpers. Values live in [-inf, +inf]; NaN is never a valid
/// state and the checked operations below throw instead of producing one.

namespace duality {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct undefined_arithmetic : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool is_finite(double x) { return std::isfinite(x); }

inline void require_not_nan(double x, const char* what = "extended real") {
    if (std::isnan(x)) throw undefined_arithmetic(std::string(what) + " is NaN");
}

/// a + b with the convention inf + finite = inf; inf + (-inf) throws.
inline double ext_add(double a, double b) {
    require_not_nan(a, "ext_add lhs");
    require_not_nan(b, "ext_add rhs");
    if ((a == inf && b == -inf) || (a == -inf && b == inf))
        throw undefined_arithmetic("inf - inf");
    return a + b;
}

inline double ext_sub(double a, double b) { return ext_add(a, -b); }

/// Product with 0 * inf = 0 (measure-theoretic convention used by modulars
/// and expectations: a zero-probability state contributes nothing).
inline double ext_mul_prob(double p, double x) {
    require_not_nan(p, "probability");
    require_not_nan(x, "ext_mul_prob value");
    if (p == 0.0) return 0.0;
    return p * x;
}

}  // namespace duality
