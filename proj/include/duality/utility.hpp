#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "duality/extended.hpp"

/// Utility functions U: nondecreasing, concave, finite somewhere, with
/// effective domain bounded below by x_lower (possibly -inf) and bliss point
/// x_bliss = inf{x : U(x) = sup U} (possibly +inf).
///
/// Named families carry closed-form values, derivatives and concave
/// conjugates; a custom family takes callables and conjugates numerically.
/// Vertical normalization (U(0) = 0) is explicit, never automatic: solvers
/// consume the spec as given, and the offset is tracked so the conjugate
/// shifts consistently (U -> U + c implies V -> V + c).

namespace duality {

struct DegenerateUtility : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BracketTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class UtilityFamily {
    exponential,          ///< U(x) = -exp(-rate x)
    logarithmic,          ///< U(x) = ln(x + shift)
    power,                ///< U(x) = ((1+x)^p - 1)/p, p < 1, p != 0
    quadratic,            ///< U(x) = x - x^2/2 capped at 1/2 (bliss 1)
    truncated_quadratic,  ///< U(x) = -(b-x)^2/2 for x <= b, 0 beyond
    piecewise_linear,     ///< decreasing positive slopes, concave kinks
    custom
};

/// Asymptotic taxonomy: L_F   : x_lower = -inf, lim U(x)/x finite positive;
///                      SL_F  : x_lower = -inf, lim U(x)/x = +inf;
///                      SL_INF: x_lower finite.
enum class CaseTag { L_F, SL_F, SL_INF };

std::string to_string(CaseTag tag);
std::string to_string(UtilityFamily family);

class UtilitySpec {
  public:
    static UtilitySpec exponential(double rate = 1.0);
    static UtilitySpec logarithmic(double shift = 1.0);
    static UtilitySpec power(double exponent);
    static UtilitySpec quadratic();
    static UtilitySpec truncated_quadratic(double bliss);
    static UtilitySpec piecewise_linear(std::vector<double> slopes,
                                        std::vector<double> kinks);
    /// x_lower < 0 < x_bliss required; derivative must be the right derivative.
    static UtilitySpec custom(std::function<double(double)> value,
                              std::function<double(double)> derivative,
                              double x_lower, double x_bliss = inf);

    /// Extended value: -inf strictly below x_lower (and at it for families
    /// whose utility diverges there).
    double value(double x) const;
    /// Right derivative; +inf at and below a finite x_lower when U blows up.
    double derivative(double x) const;

    /// Same utility shifted so that value(0) == 0.
    UtilitySpec normalized() const;
    /// Same utility plus a constant (the conjugate shifts by the same c).
    UtilitySpec shifted(double c) const;
    bool is_normalized() const { return std::fabs(value(0.0)) < 1e-14; }

    double x_lower() const { return x_lower_; }
    double x_bliss() const { return x_bliss_; }
    double u_at_zero() const { return value(0.0); }
    double u_sup() const;                ///< sup U = lim_{x->inf} U(x)
    double marginal_at_zero() const;     ///< a = U'_+(0)
    UtilityFamily family() const { return family_; }
    const std::vector<double>& params() const { return params_; }
    double offset() const { return offset_; }

  private:
    UtilitySpec() = default;
    void validate() const;

    UtilityFamily family_ = UtilityFamily::custom;
    std::vector<double> params_;
    double offset_ = 0.0;
    double x_lower_ = -inf;
    double x_bliss_ = inf;
    std::function<double(double)> custom_value_;
    std::function<double(double)> custom_derivative_;
};

/// Concave-conjugate package. v(y) = -inf_x {xy - U(x)} with the convention
/// dom v in [0, inf) (U nondecreasing); v is convex, decreasing-then-
/// increasing on its domain with v(a) = U(0) at a = U'_+(0).
/// u_hat(x) = U(0) - U(-|x|) is the Young companion (offset-independent);
/// v_hat(y) = v(max(|y|, a)) - U(0) its conjugate normalized to v_hat(0) >= 0.
struct ConjugatePair {
    CaseTag case_tag;
    double a;  ///< U'_+(0)
    std::function<double(double)> v;
    std::function<double(double)> v_prime;  ///< derivative on (0, inf) interior
    std::function<double(double)> u_hat;
    std::function<double(double)> v_hat;
};

/// Closed forms for named families; numeric 1-D minimization for custom,
/// with the search bracket [x_lower + 1e-9, 1e6] expanded on an upper
/// boundary hit (cap 1e12, then BracketTooSmall), tolerance 1e-10.
ConjugatePair conjugate(const UtilitySpec& u);

CaseTag classify_case(const UtilitySpec& u);

}  // namespace duality
