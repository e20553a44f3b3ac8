#include "duality/utility.hpp"

#include <algorithm>
#include <cmath>

#include "duality/scalar.hpp"

namespace duality {

std::string to_string(CaseTag tag) {
    switch (tag) {
        case CaseTag::L_F: return "L_F";
        case CaseTag::SL_F: return "SL_F";
        case CaseTag::SL_INF: return "SL_INF";
    }
    return "?";
}

std::string to_string(UtilityFamily family) {
    switch (family) {
        case UtilityFamily::exponential: return "exponential";
        case UtilityFamily::logarithmic: return "logarithmic";
        case UtilityFamily::power: return "power";
        case UtilityFamily::quadratic: return "quadratic";
        case UtilityFamily::truncated_quadratic: return "truncated_quadratic";
        case UtilityFamily::piecewise_linear: return "piecewise_linear";
        case UtilityFamily::custom: return "custom";
    }
    return "?";
}

UtilitySpec UtilitySpec::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    UtilitySpec u;
    u.family_ = UtilityFamily::exponential;
    u.params_ = {rate};
    u.x_lower_ = -inf;
    u.x_bliss_ = inf;
    return u;
}

UtilitySpec UtilitySpec::logarithmic(double shift) {
    if (!(shift > 0.0)) throw std::invalid_argument("logarithmic: shift must be > 0");
    UtilitySpec u;
    u.family_ = UtilityFamily::logarithmic;
    u.params_ = {shift};
    u.x_lower_ = -shift;
    u.x_bliss_ = inf;
    return u;
}

UtilitySpec UtilitySpec::power(double exponent) {
    if (!(exponent < 1.0) || exponent == 0.0)
        throw std::invalid_argument("power: exponent must be < 1 and nonzero");
    UtilitySpec u;
    u.family_ = UtilityFamily::power;
    u.params_ = {exponent};
    u.x_lower_ = -1.0;
    u.x_bliss_ = inf;
    return u;
}

UtilitySpec UtilitySpec::quadratic() {
    UtilitySpec u;
    u.family_ = UtilityFamily::quadratic;
    u.x_lower_ = -inf;
    u.x_bliss_ = 1.0;
    return u;
}

UtilitySpec UtilitySpec::truncated_quadratic(double bliss) {
    if (!(bliss > 0.0))
        throw DegenerateUtility("truncated_quadratic: bliss must be > 0");
    UtilitySpec u;
    u.family_ = UtilityFamily::truncated_quadratic;
    u.params_ = {bliss};
    u.x_lower_ = -inf;
    u.x_bliss_ = bliss;
    return u;
}

UtilitySpec UtilitySpec::piecewise_linear(std::vector<double> slopes,
                                          std::vector<double> kinks) {
    if (slopes.empty()) throw DegenerateUtility("piecewise_linear: no slopes");
    if (kinks.size() + 1 != slopes.size())
        throw std::invalid_argument("piecewise_linear: need one kink between slopes");
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        if (!(slopes[i] > 0.0))
            throw DegenerateUtility("piecewise_linear: slopes must be positive");
        if (i > 0 && !(slopes[i] < slopes[i - 1]))
            throw std::invalid_argument("piecewise_linear: slopes must strictly decrease");
    }
    for (std::size_t i = 1; i < kinks.size(); ++i)
        if (!(kinks[i] > kinks[i - 1]))
            throw std::invalid_argument("piecewise_linear: kinks must strictly increase");
    UtilitySpec u;
    u.family_ = UtilityFamily::piecewise_linear;
    u.params_ = kinks;
    u.params_.insert(u.params_.end(), slopes.begin(), slopes.end());
    u.x_lower_ = -inf;
    u.x_bliss_ = inf;
    return u;
}

UtilitySpec UtilitySpec::custom(std::function<double(double)> value,
                                std::function<double(double)> derivative,
                                double x_lower, double x_bliss) {
    UtilitySpec u;
    u.family_ = UtilityFamily::custom;
    u.x_lower_ = x_lower;
    u.x_bliss_ = x_bliss;
    u.custom_value_ = std::move(value);
    u.custom_derivative_ = std::move(derivative);
    u.validate();
    return u;
}

void UtilitySpec::validate() const {
    if (!(x_lower_ < 0.0 && 0.0 < x_bliss_))
        throw DegenerateUtility("utility must satisfy x_lower < 0 < x_bliss");
    // Spot-check monotonicity/concavity of a custom spec via its derivative.
    if (family_ == UtilityFamily::custom) {
        double lo = is_finite(x_lower_) ? x_lower_ + 1e-6 : -10.0;
        std::vector<double> pts{lo, 0.5 * lo, 0.0, 1.0, 10.0};
        double prev = inf;
        for (double x : pts) {
            if (x >= x_bliss_) break;
            double d = custom_derivative_(x);
            if (std::isnan(d) || d < -1e-12)
                throw DegenerateUtility("custom utility: derivative negative");
            if (d > prev + 1e-9 * (1.0 + std::fabs(prev)))
                throw DegenerateUtility("custom utility: derivative increasing");
            prev = d;
        }
    }
}

namespace {

// params layout for piecewise_linear: [kinks..., slopes...]
struct PwView {
    const double* kinks;
    const double* slopes;
    std::size_t nk, ns;
    explicit PwView(const std::vector<double>& p) {
        ns = (p.size() + 1) / 2;
        nk = ns - 1;
        kinks = p.data();
        slopes = p.data() + nk;
    }
    // U(0) = 0 raw; integrate the step derivative from 0 to x
    double value(double x) const {
        double acc = 0.0, pos = 0.0;
        if (x >= 0.0) {
            std::size_t seg = 0;
            while (seg < nk && kinks[seg] <= 0.0) ++seg;
            while (pos < x) {
                double end = (seg < nk && kinks[seg] < x) ? kinks[seg] : x;
                if (end > pos) acc += slopes[seg] * (end - pos);
                pos = end;
                if (seg < nk && pos >= kinks[seg]) ++seg; else break;
            }
            return acc;
        }
        std::size_t seg = nk;
        while (seg > 0 && kinks[seg - 1] >= 0.0) --seg;
        while (pos > x) {
            double end = (seg > 0 && kinks[seg - 1] > x) ? kinks[seg - 1] : x;
            acc -= slopes[seg] * (pos - end);
            pos = end;
            if (seg > 0 && pos <= kinks[seg - 1]) --seg; else break;
        }
        return acc;
    }
    double right_derivative(double x) const {
        std::size_t seg = 0;
        while (seg < nk && x >= kinks[seg]) ++seg;
        return slopes[seg];
    }
};

}  // namespace

double UtilitySpec::value(double x) const {
    if (std::isnan(x)) throw std::invalid_argument("utility value at NaN");
    switch (family_) {
        case UtilityFamily::exponential:
            return -std::exp(-params_[0] * x) + offset_;
        case UtilityFamily::logarithmic:
            if (x <= -params_[0]) return -inf;
            return std::log(x + params_[0]) + offset_;
        case UtilityFamily::power: {
            double p = params_[0];
            if (p > 0.0) {
                if (x < -1.0) return -inf;
                return (std::pow(1.0 + x, p) - 1.0) / p + offset_;
            }
            if (x <= -1.0) return -inf;
            return (std::pow(1.0 + x, p) - 1.0) / p + offset_;
        }
        case UtilityFamily::quadratic:
            return (x <= 1.0 ? x - 0.5 * x * x : 0.5) + offset_;
        case UtilityFamily::truncated_quadratic: {
            double b = params_[0];
            return (x <= b ? -0.5 * (b - x) * (b - x) : 0.0) + offset_;
        }
        case UtilityFamily::piecewise_linear:
            return PwView(params_).value(x) + offset_;
        case UtilityFamily::custom:
            if (x < x_lower_) return -inf;
            return custom_value_(x) + offset_;
    }
    return -inf;
}

double UtilitySpec::derivative(double x) const {
    switch (family_) {
        case UtilityFamily::exponential:
            return params_[0] * std::exp(-params_[0] * x);
        case UtilityFamily::logarithmic:
            if (x <= -params_[0]) return inf;
            return 1.0 / (x + params_[0]);
        case UtilityFamily::power: {
            double p = params_[0];
            if (x <= -1.0) return inf;
            return std::pow(1.0 + x, p - 1.0);
        }
        case UtilityFamily::quadratic:
            return x <= 1.0 ? 1.0 - x : 0.0;
        case UtilityFamily::truncated_quadratic: {
            double b = params_[0];
            return x <= b ? b - x : 0.0;
        }
        case UtilityFamily::piecewise_linear:
            return PwView(params_).right_derivative(x);
        case UtilityFamily::custom:
            if (x < x_lower_) return inf;
            return custom_derivative_(x);
    }
    return 0.0;
}

UtilitySpec UtilitySpec::normalized() const {
    double u0 = value(0.0);
    if (!is_finite(u0)) throw DegenerateUtility("cannot normalize: U(0) not finite");
    UtilitySpec u = *this;
    u.offset_ -= u0;
    return u;
}

UtilitySpec UtilitySpec::shifted(double c) const {
    require_not_nan(c, "utility shift");
    if (!is_finite(c)) throw std::invalid_argument("utility shift must be finite");
    UtilitySpec u = *this;
    u.offset_ += c;
    return u;
}

double UtilitySpec::u_sup() const {
    switch (family_) {
        case UtilityFamily::exponential:
            return offset_;
        case UtilityFamily::logarithmic:
        case UtilityFamily::piecewise_linear:
            return inf;
        case UtilityFamily::power:
            return params_[0] < 0.0 ? -1.0 / params_[0] + offset_ : inf;
        case UtilityFamily::quadratic:
            return 0.5 + offset_;
        case UtilityFamily::truncated_quadratic:
            return offset_;
        case UtilityFamily::custom: {
            if (is_finite(x_bliss_)) return value(x_bliss_);
            double v = value(1e12);
            return v;  // callable's asymptote; good enough for escape bounds
        }
    }
    return inf;
}

double UtilitySpec::marginal_at_zero() const { return derivative(0.0); }

CaseTag classify_case(const UtilitySpec& u) {
    if (is_finite(u.x_lower())) return CaseTag::SL_INF;
    // x_lower = -inf: distinguish by the loss-side slope limit. Concavity makes
    // U'(x) nondecreasing as x -> -inf, so sampled slopes expose the limit.
    double d6 = u.derivative(-1e6);
    double d8 = u.derivative(-1e8);
    if (!is_finite(d8) || d8 > 1e12) return CaseTag::SL_F;
    // finite limit: slope growth from -1e6 to -1e8 should be negligible
    if (d8 <= d6 * (1.0 + 1e-3) + 1e-12) return CaseTag::L_F;
    return CaseTag::SL_F;
}

namespace {

std::function<double(double)> numeric_conjugate_v(const UtilitySpec& u) {
    // v(y) = -inf_{x in dom U} (xy - U(x)); the objective is convex in x.
    return [u](double y) {
        if (y < 0.0) return inf;
        double lo = is_finite(u.x_lower()) ? u.x_lower() + 1e-9 : -1e6;
        double hi = 1e6;
        for (;;) {
            auto obj = [&](double x) {
                double ux = u.value(x);
                if (!is_finite(ux)) return inf;
                return x * y - ux;
            };
            ScalarMin m = golden_section_min(obj, lo, hi, 1e-10, 600);
            double span = hi - lo;
            bool at_hi = m.x > hi - 1e-6 * span;
            bool at_lo = !is_finite(u.x_lower()) && m.x < lo + 1e-6 * span;
            if (!at_hi && !at_lo) return -m.fx;
            if (at_hi) {
                if (hi >= 1e12) {
                    // Still descending at the cap. If the slope has plateaued
                    // above y the objective goes to -inf, i.e. v(y) = +inf;
                    // otherwise the minimizer is finite but out of reach.
                    if (u.derivative(hi) > y) return inf;
                    throw BracketTooSmall("conjugate: upper bracket exhausted");
                }
                hi = std::min(hi * 10.0, 1e12);
            }
            if (at_lo) {
                if (lo <= -1e12) {
                    if (u.derivative(lo) < y) return inf;  // loss slope below y
                    throw BracketTooSmall("conjugate: lower bracket exhausted");
                }
                lo = std::max(lo * 10.0, -1e12);
            }
        }
    };
}

}  // namespace

ConjugatePair conjugate(const UtilitySpec& u) {
    ConjugatePair pair;
    pair.case_tag = classify_case(u);
    pair.a = u.marginal_at_zero();
    const double off = u.offset();

    switch (u.family()) {
        case UtilityFamily::exponential: {
            double r = u.params()[0];
            pair.v = [r, off](double y) {
                if (y < 0.0) return inf;
                if (y == 0.0) return off;
                return (y / r) * (std::log(y / r) - 1.0) + off;
            };
            pair.v_prime = [r](double y) { return std::log(y / r) / r; };
            break;
        }
        case UtilityFamily::logarithmic: {
            double s = u.params()[0];
            pair.v = [s, off](double y) {
                if (y <= 0.0) return inf;
                return s * y - std::log(y) - 1.0 + off;
            };
            pair.v_prime = [s](double y) { return s - 1.0 / y; };
            break;
        }
        case UtilityFamily::power: {
            double p = u.params()[0];
            double q = p / (p - 1.0);
            pair.v = [p, q, off](double y) {
                if (y < 0.0) return inf;
                if (y == 0.0) return p < 0.0 ? -1.0 / p + off : inf;
                return std::pow(y, q) * (1.0 / p - 1.0) + y - 1.0 / p + off;
            };
            pair.v_prime = [p, q](double y) {
                return q * std::pow(y, q - 1.0) * (1.0 / p - 1.0) + 1.0;
            };
            break;
        }
        case UtilityFamily::quadratic:
        case UtilityFamily::truncated_quadratic: {
            double b = u.family() == UtilityFamily::quadratic ? 1.0 : u.params()[0];
            double c = u.family() == UtilityFamily::quadratic ? 0.5 : 0.0;
            pair.v = [b, c, off](double y) {
                if (y < 0.0) return inf;
                return 0.5 * y * y - b * y + c + off;
            };
            pair.v_prime = [b](double y) { return y - b; };
            break;
        }
        case UtilityFamily::piecewise_linear: {
            // Polyhedral conjugate: dom v = [s_min, s_max], linear between the
            // slope breakpoints with v(y) = k_j y - U(k_j) on [s_{j+1}, s_j].
            UtilitySpec spec = u;
            PwView pw(spec.params());
            std::vector<double> slopes(pw.slopes, pw.slopes + pw.ns);
            std::vector<double> kinks(pw.kinks, pw.kinks + pw.nk);
            std::vector<double> ukinks(pw.nk);
            for (std::size_t j = 0; j < pw.nk; ++j) ukinks[j] = spec.value(kinks[j]);
            pair.v = [slopes, kinks, ukinks](double y) {
                if (y < slopes.back() - 1e-12 || y > slopes.front() + 1e-12)
                    return inf;
                if (kinks.empty()) return 0.0;  // single slope: v = -U(0) = 0 raw
                // find segment: y in [slopes[j+1], slopes[j]] -> kink j
                std::size_t j = 0;
                while (j + 1 < slopes.size() && y < slopes[j + 1]) ++j;
                j = std::min(j, kinks.size() - 1);
                return ukinks[j] - kinks[j] * y;
            };
            pair.v_prime = [slopes, kinks](double y) {
                if (kinks.empty()) return 0.0;
                std::size_t j = 0;
                while (j + 1 < slopes.size() && y < slopes[j + 1]) ++j;
                j = std::min(j, kinks.size() - 1);
                return -kinks[j];
            };
            break;
        }
        case UtilityFamily::custom: {
            pair.v = numeric_conjugate_v(u);
            auto v = pair.v;
            pair.v_prime = [v](double y) {
                double h = 1e-6 * (1.0 + std::fabs(y));
                return (v(y + h) - v(y - h)) / (2.0 * h);
            };
            break;
        }
    }

    // Young companion and its conjugate are offset-independent.
    const double u0 = u.u_at_zero();
    UtilitySpec base = u;
    pair.u_hat = [base, u0](double x) {
        double ux = base.value(-std::fabs(x));
        if (!is_finite(ux)) return inf;
        return u0 - ux;
    };
    auto v = pair.v;
    double a = pair.a;
    pair.v_hat = [v, a, u0](double y) {
        double arg = std::max(std::fabs(y), a);
        return ext_sub(v(arg), u0);
    };
    return pair;
}

}  // namespace duality
