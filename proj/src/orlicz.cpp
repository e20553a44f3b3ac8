#include "duality/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "duality/scalar.hpp"

namespace duality::orlicz {

namespace {

constexpr double kBracketLo = 1e-12;
constexpr double kBracketHi = 1e12;
constexpr std::size_t kSeriesCap = 10'000'000;

}  // namespace

YoungFunction::YoungFunction(std::string name, std::function<double(double)> fn)
    : name_(std::move(name)), fn_(std::move(fn)) {}

YoungFunction YoungFunction::exponential() {
    return YoungFunction("exp1", [](double x) { return std::expm1(std::fabs(x)); });
}

YoungFunction YoungFunction::power(double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("power Young function needs p >= 1");
    return YoungFunction("power(" + std::to_string(p) + ")",
                         [p](double x) { return std::pow(std::fabs(x), p); });
}

YoungFunction YoungFunction::make(std::string name, std::function<double(double)> fn) {
    if (!fn) throw std::invalid_argument("Young function callable is empty");
    if (std::fabs(fn(0.0)) > 1e-14)
        throw std::invalid_argument("Young function must vanish at 0");
    if (std::fabs(fn(1.0) - fn(-1.0)) > 1e-12 * (1.0 + std::fabs(fn(1.0))))
        throw std::invalid_argument("Young function must be even");
    if (fn(2.0) < fn(1.0) || fn(1.0) < 0.0)
        throw std::invalid_argument("Young function must be nondecreasing on [0, inf)");
    return YoungFunction(std::move(name), std::move(fn));
}

void FiniteRandomVariable::validate(double mass_tol) const {
    if (outcomes.size() != probs.size())
        throw std::invalid_argument("outcome/probability size mismatch");
    if (outcomes.empty()) throw std::invalid_argument("empty random variable");
    double mass = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("negative or NaN probability");
        mass += p;
    }
    if (std::fabs(mass - 1.0) > mass_tol)
        throw std::invalid_argument("probabilities sum to " + std::to_string(mass));
}

ModularResult modular(const YoungFunction& phi, const FiniteRandomVariable& x,
                      double scale) {
    x.validate(1e-9);
    double total = 0.0;
    for (std::size_t i = 0; i < x.outcomes.size(); ++i) {
        if (x.probs[i] == 0.0) continue;  // 0 * Phi(anything) = 0
        double term = phi(scale * x.outcomes[i]);
        if (!is_finite(term)) return {inf, 0.0};
        total += x.probs[i] * term;
        if (total > 1e300) return {inf, 0.0};
    }
    return {total, 0.0};
}

ModularResult modular(const YoungFunction& phi, const SeriesRandomVariable& x,
                      double scale) {
    if (!x.term || !x.tail_bound)
        throw std::invalid_argument("series variable missing term or tail bound");
    double total = 0.0;
    for (std::size_t k = 0; k < kSeriesCap; ++k) {
        std::optional<double> tb = x.tail_bound(k, scale);
        if (tb) {
            if (*tb == inf) return {inf, 0.0};  // certified divergence
            if (*tb <= 1e-12 * total + 1e-250) return {total, *tb};
        }
        SeriesTerm t = x.term(k);
        if (!(t.prob >= 0.0)) throw std::invalid_argument("negative series probability");
        if (t.prob == 0.0) continue;
        double term = phi(scale * t.outcome);
        if (!is_finite(term)) return {inf, 0.0};
        total += t.prob * term;
        if (total > 1e300) return {inf, 0.0};
    }
    throw TailBoundUnavailable("no usable tail bound within " +
                               std::to_string(kSeriesCap) + " terms (scale " +
                               std::to_string(scale) + ")");
}

namespace {

/// Shared gauge-norm driver over a modular closure rho(1/lambda).
GaugeNorm gauge_norm_impl(const std::function<ModularResult(double)>& mod_at) {
    auto rho = [&](double lambda) { return mod_at(1.0 / lambda).value; };

    double hi = kBracketHi;
    double rho_hi = rho(hi);
    if (!(rho_hi <= 1.0))
        throw NonFiniteNorm("modular exceeds 1 at every scaling up to 1e12");

    double lo = kBracketLo;
    double rho_lo = rho(lo);
    if (rho_lo <= 1.0) {
        // Norm at or below the bracket floor; report the floor.
        return {lo, std::fabs(rho_lo - 1.0), lo};
    }

    // Geometric bisection while the bracket spans orders of magnitude, then
    // arithmetic; 200 iterations shrink far past double resolution.
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = (hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (rho(mid) <= 1.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // Secant polish when the modular is finite on both ends (continuous case).
    rho_lo = rho(lo);
    rho_hi = rho(hi);
    if (is_finite(rho_lo) && rho_lo > 1.0 && rho_hi < 1.0) {
        try {
            double r = find_root([&](double l) { return rho(l) - 1.0; }, lo, hi, 1e-15);
            if (rho(r) <= 1.0 + 1e-10) hi = std::max(r, lo);
        } catch (const std::exception&) {
            // keep the bisection bracket
        }
    }
    return {hi, std::fabs(rho(hi) - 1.0), hi - lo};
}

}  // namespace

GaugeNorm gauge_norm(const YoungFunction& phi, const FiniteRandomVariable& x) {
    x.validate(1e-9);
    double amax = 0.0;
    for (std::size_t i = 0; i < x.outcomes.size(); ++i)
        if (x.probs[i] > 0.0) amax = std::max(amax, std::fabs(x.outcomes[i]));
    if (amax == 0.0) return {0.0, 1.0, 0.0};  // a.s. zero variable
    return gauge_norm_impl([&](double s) { return modular(phi, x, s); });
}

GaugeNorm gauge_norm(const YoungFunction& phi, const SeriesRandomVariable& x) {
    return gauge_norm_impl([&](double s) { return modular(phi, x, s); });
}

Delta2Report delta2_check(const YoungFunction& phi, double x0,
                          const std::vector<double>& grid,
                          double explosion_threshold) {
    std::vector<double> xs;
    for (double g : grid)
        if (g > x0 && phi(g) > 0.0) xs.push_back(g);
    std::sort(xs.begin(), xs.end());
    if (xs.size() < 8 || xs.back() < 1000.0 * xs.front())
        throw InconclusiveGrid("grid must span at least three decades above x0");

    std::vector<double> ratios(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double num = phi(2.0 * xs[i]);
        double den = phi(xs[i]);
        double r = is_finite(num) ? num / den : inf;
        if (r > explosion_threshold) {
            return {false, 0.0, xs[i], r, x0};
        }
        ratios[i] = r;
    }

    // Bounded on the grid. Certify only if the ratio is not still climbing at
    // the right edge (otherwise a larger grid could reveal an explosion).
    std::size_t tail_start = xs.size() - std::max<std::size_t>(2, xs.size() / 5);
    double early_max = 0.0, late_max = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i < tail_start)
            early_max = std::max(early_max, ratios[i]);
        else
            late_max = std::max(late_max, ratios[i]);
    }
    if (late_max > early_max * (1.0 + 1e-9) &&
        ratios.back() >= late_max * (1.0 - 1e-9)) {
        throw InconclusiveGrid("growth ratio still increasing at the grid edge (" +
                               std::to_string(ratios.back()) + " at x = " +
                               std::to_string(xs.back()) + ")");
    }
    double K = std::max(early_max, late_max);
    return {true, K, 0.0, 0.0, x0};
}

ConvergenceReport modular_vs_norm(
    const YoungFunction& phi,
    const std::function<SeriesRandomVariable(std::size_t)>& sequence,
    const std::vector<std::size_t>& ks, const std::vector<double>& scalings) {
    if (ks.empty() || scalings.empty())
        throw std::invalid_argument("need at least one index and one scaling");
    ConvergenceReport rep;
    rep.scalings = scalings;
    for (std::size_t k : ks) {
        SeriesRandomVariable yk = sequence(k);
        ConvergenceRow row;
        row.k = k;
        for (double s : scalings) row.modulars.push_back(modular(phi, yk, s).value);
        row.norm = gauge_norm(phi, yk).value;
        rep.rows.push_back(std::move(row));
    }

    rep.modular_to_zero = false;
    for (std::size_t j = 0; j < scalings.size(); ++j) {
        bool decreasing = true;
        for (std::size_t i = 1; i < rep.rows.size(); ++i)
            decreasing = decreasing &&
                         rep.rows[i].modulars[j] <= rep.rows[i - 1].modulars[j] + 1e-15;
        double first = rep.rows.front().modulars[j];
        double last = rep.rows.back().modulars[j];
        if (decreasing && is_finite(first) && last < 1e-3 && last < 0.01 * first)
            rep.modular_to_zero = true;
    }
    double min_norm = inf;
    for (const auto& row : rep.rows) min_norm = std::min(min_norm, row.norm);
    rep.norm_not_to_zero = min_norm > 0.5;
    return rep;
}

HolderReport holder_check(const FiniteRandomVariable& x,
                          const FiniteRandomVariable& y,
                          const YoungFunction& phi, const YoungFunction& psi) {
    x.validate(1e-9);
    y.validate(1e-9);
    if (x.probs.size() != y.probs.size())
        throw std::invalid_argument("variables live on different spaces");
    for (std::size_t i = 0; i < x.probs.size(); ++i)
        if (std::fabs(x.probs[i] - y.probs[i]) > 1e-12)
            throw std::invalid_argument("variables live on different spaces");

    double lhs = 0.0;
    for (std::size_t i = 0; i < x.probs.size(); ++i)
        lhs += x.probs[i] * std::fabs(x.outcomes[i] * y.outcomes[i]);
    double rhs = 2.0 * gauge_norm(phi, x).value * gauge_norm(psi, y).value;
    return {lhs, rhs, lhs <= rhs * (1.0 + 1e-12) + 1e-15};
}

Membership membership(const FiniteRandomVariable& x) {
    x.validate(1e-9);
    return {true, true,
            "finite probability space: E[Phi(lambda X)] is a finite sum for every "
            "lambda, so X lies in the Orlicz space and its heart"};
}

}  // namespace duality::orlicz
