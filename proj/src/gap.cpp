#include "duality/gap.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "duality/extended.hpp"
#include "duality/scalar.hpp"

namespace duality::gap {

GapMarket::GapMarket(int truncation) : n_(truncation) {
    if (truncation < 2)
        throw std::invalid_argument("gap market: truncation must be at least 2");
    states_.reserve(2 * static_cast<std::size_t>(n_) + 1);
    for (int s = -n_; s <= n_; ++s) states_.push_back(s);
    probs_.assign(states_.size(), 0.0);
    double assigned = 0.0;
    for (int s = -n_; s <= n_; ++s) {
        if (s == 0) continue;
        double p = (s == -1) ? std::exp(-5.0) : std::exp(-std::abs(static_cast<double>(s)));
        probs_[index_of(s)] = p;
        assigned += p;
    }
    double rest = 1.0 - assigned;
    if (rest <= 0.0)
        throw std::logic_error("gap market: no residual mass left for state 0");
    probs_[index_of(0)] = rest;
}

std::size_t GapMarket::index_of(int state) const {
    if (state < -n_ || state > n_)
        throw IndexOutOfTruncation("gap market: state " + std::to_string(state) +
                                   " outside truncation " + std::to_string(n_));
    return static_cast<std::size_t>(state + n_);
}

std::vector<double> GapMarket::x_claim() const {
    std::vector<double> x(states_.size(), 0.0);
    x[index_of(1)] = 1.0;
    x[index_of(-1)] = -1.0;
    return x;
}

std::vector<double> GapMarket::y_shock(int k) const {
    int start = std::max(k, 2);
    if (start > n_)
        throw IndexOutOfTruncation("gap market: shock index " + std::to_string(k) +
                                   " exceeds truncation " + std::to_string(n_));
    std::vector<double> y(states_.size(), 0.0);
    for (int s = start; s <= n_; ++s) {
        y[index_of(s)] = static_cast<double>(s);
        y[index_of(-s)] = static_cast<double>(-s);
    }
    return y;
}

std::vector<double> GapMarket::x_k(int k) const {
    std::vector<double> v = y_shock(k);
    v[index_of(1)] += 1.0;
    v[index_of(-1)] -= 1.0;
    return v;
}

double GapMarket::expectation(const std::vector<double>& claim) const {
    if (claim.size() != probs_.size())
        throw std::invalid_argument("gap market: claim length does not match state count");
    double tot = 0.0;
    for (std::size_t i = 0; i < claim.size(); ++i) tot += probs_[i] * claim[i];
    return tot;
}

double exponential_moment(const GapMarket& m, double lam) {
    require_not_nan(lam, "exponential moment order");
    double p1 = m.probs()[m.index_of(1)];
    double pm1 = m.probs()[m.index_of(-1)];
    double zero_mass = 1.0 - p1 - pm1;
    return p1 * std::exp(-lam) + pm1 * std::exp(lam) + zero_mass;
}

double exponential_moment_argmin(const GapMarket& m) {
    auto f = [&m](double l) { return exponential_moment(m, l); };
    ScalarMin rough = golden_section_min(f, -20.0, 20.0, 1e-10, 400);
    double p1 = m.probs()[m.index_of(1)];
    double pm1 = m.probs()[m.index_of(-1)];
    auto fp = [p1, pm1](double l) { return -p1 * std::exp(-l) + pm1 * std::exp(l); };
    return newton_polish(fp, rough.x, -20.0, 20.0, 1e-14, 60);
}

Completions completions(const GapMarket& m) {
    Completions c;
    const std::vector<double> x = m.x_claim();
    const double e1 = exponential_moment(m, 1.0);
    const double e2 = exponential_moment(m, 2.0);

    c.effective.resize(x.size());
    c.full.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        c.effective[i] = std::exp(-x[i]) / e1;
        c.full[i] = std::exp(-2.0 * x[i]) / e2;
    }
    c.entropy_full = -std::log(e2);

    std::vector<double> xe(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xe[i] = x[i] * std::exp(-x[i]);
    c.corner_value = m.expectation(xe);

    // V(y) = y ln y - y, conjugate of -e^{-x}; evaluated at y = e^{-X} the
    // dual functional plus the corner term reproduces -E[e^{-X}] exactly.
    double iv = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double y = std::exp(-x[i]);
        iv += m.probs()[i] * (y * std::log(y) - y);
    }
    c.identity_residual = std::abs(iv + c.corner_value + e1);

    // Residuals of the separating measure built from the full completion.
    double ex_q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        ex_q += m.probs()[i] * c.full[i] * x[i];
    double worst = std::abs(ex_q);
    const int n = m.truncation();
    for (int k = 2; k <= n; ++k) {
        double s = 0.0;
        for (int mm = k; mm <= n; ++mm) {
            // P and the full density are symmetric on |state| >= 2, so each
            // pair contributes p * (mm - mm) = 0 with no rounding at all.
            double pair = static_cast<double>(mm) + static_cast<double>(-mm);
            s += m.probs()[m.index_of(mm)] * c.full[m.index_of(mm)] * pair;
        }
        worst = std::max(worst, std::abs(s));
    }
    c.separating_residual = worst;
    return c;
}

namespace {

struct CleanCoeffs {
    std::vector<std::pair<int, double>> terms;  // clamped index, coefficient
    double xi_total = 0.0;
};

CleanCoeffs clean_coeffs(int truncation, const std::vector<ShockTerm>& coeffs) {
    CleanCoeffs cc;
    int prev = 1;
    for (const ShockTerm& t : coeffs) {
        if (t.k > truncation)
            throw IndexOutOfTruncation("gap mechanics: shock index " + std::to_string(t.k) +
                                       " exceeds truncation " + std::to_string(truncation));
        require_not_nan(t.lambda, "shock coefficient");
        if (!is_finite(t.lambda))
            throw std::invalid_argument("gap mechanics: shock coefficient must be finite");
        int kk = std::max(t.k, 2);
        if (kk <= prev)
            throw std::invalid_argument("gap mechanics: shock indices must be ascending and distinct");
        cc.terms.emplace_back(kk, t.lambda);
        cc.xi_total += t.lambda;
        prev = kk;
    }
    return cc;
}

double z_at_state(const CleanCoeffs& cc, int state) {
    int a = std::abs(state);
    if (a == 1) return state > 0 ? cc.xi_total : -cc.xi_total;
    if (a < 2) return 0.0;
    double xi = 0.0;
    for (const auto& t : cc.terms)
        if (t.first <= a) xi += t.second;
    return static_cast<double>(state) * xi;
}

double expected_exp_minus_z(const GapMarket& g, const CleanCoeffs& cc) {
    double tot = 0.0;
    for (std::size_t i = 0; i < g.states().size(); ++i)
        tot += g.probs()[i] * std::exp(-z_at_state(cc, g.states()[i]));
    return tot;
}

}  // namespace

MechanicsReport gap_mechanics(const GapMarket& m, const std::vector<ShockTerm>& coeffs) {
    const int n = m.truncation();
    CleanCoeffs cc = clean_coeffs(n, coeffs);

    MechanicsReport rep;
    rep.xi_total = cc.xi_total;
    rep.xi_by_level.clear();
    {
        double run = 0.0;
        std::size_t ci = 0;
        for (int lvl = 2; lvl <= n; ++lvl) {
            while (ci < cc.terms.size() && cc.terms[ci].first <= lvl) run += cc.terms[ci++].second;
            rep.xi_by_level.push_back(run);
        }
    }

    // E[Y_k | X]: on X = +-1 the shock vanishes identically; on X = 0 the
    // symmetric pairs cancel term by term.
    double zero_mass = 0.0;
    for (std::size_t i = 0; i < m.states().size(); ++i)
        if (std::abs(m.states()[i]) != 1) zero_mass += m.probs()[i];
    double worst = 0.0;
    for (int k = 2; k <= n; ++k) {
        double s = 0.0;
        for (int mm = k; mm <= n; ++mm)
            s += m.probs()[m.index_of(mm)] *
                 (static_cast<double>(mm) + static_cast<double>(-mm));
        worst = std::max(worst, std::abs(s) / zero_mass);
    }
    rep.max_conditional_residual = worst;

    rep.e_exp_z = expected_exp_minus_z(m, cc);
    rep.jensen_mid = exponential_moment(m, cc.xi_total);
    rep.jensen_rhs = exponential_moment(m, 1.0);
    double slack1 = 1e-12 * (1.0 + std::abs(rep.jensen_mid));
    double slack2 = 1e-12 * (1.0 + std::abs(rep.jensen_rhs));
    rep.jensen_chain_holds =
        (rep.e_exp_z >= rep.jensen_mid - slack1) && (rep.jensen_mid >= rep.jensen_rhs - slack2);

    int kmax = cc.terms.empty() ? 2 : cc.terms.back().first;
    for (int nt : {10, 20, 40}) {
        if (kmax > nt) continue;
        GapMarket g(nt);
        rep.growth.emplace_back(nt, expected_exp_minus_z(g, cc));
    }

    rep.stabilizes = false;
    if (rep.growth.size() >= 2 && std::abs(cc.xi_total) < 1.0) {
        const auto& prev = rep.growth[rep.growth.size() - 2];
        const auto& last = rep.growth.back();
        double diff = std::abs(last.second - prev.second);
        // Each state added between the two truncations moves at most
        // e^{-m}(e^{|xi| m} + e^{-|xi| m}) plus the matching state-0 mass, so
        // 4 e^{-(1-|xi|) m} per level bounds the change.
        double a = 1.0 - std::abs(cc.xi_total);
        double envelope = 0.0;
        for (int mm = prev.first + 1; mm <= last.first; ++mm)
            envelope += 4.0 * std::exp(-a * static_cast<double>(mm));
        rep.stabilizes = diff <= std::max(envelope, 1e-300);
    }
    return rep;
}

GapCertificate gap_certificate(const GapMarket& m) {
    GapCertificate c;
    const double e1 = exponential_moment(m, 1.0);
    const double e2 = exponential_moment(m, 2.0);
    c.u_over_c = -e1;
    c.u_over_bipolar = -e2;
    c.margin = c.u_over_bipolar - c.u_over_c;
    c.strict_gap = c.margin > 1e-9;

    auto f = [&m](double l) { return exponential_moment(m, l); };
    c.lambda_hat_boxed = golden_section_min(f, -1.0, 1.0, 1e-12, 400).x;
    ScalarMin rough = golden_section_min(f, -20.0, 20.0, 1e-10, 400);
    double p1 = m.probs()[m.index_of(1)];
    double pm1 = m.probs()[m.index_of(-1)];
    auto fp = [p1, pm1](double l) { return -p1 * std::exp(-l) + pm1 * std::exp(l); };
    c.lambda_hat_free = newton_polish(fp, rough.x, -20.0, 20.0, 1e-14, 60);

    // Randomized audit: admissible aggregates |xi| <= 0.999 must never beat
    // the claimed optimum over the constrained strategies.
    std::mt19937_64 rng(987654321ull);
    std::uniform_int_distribution<int> n_terms(1, 4);
    std::uniform_int_distribution<int> k_draw(2, std::min(m.truncation(), 30));
    std::uniform_real_distribution<double> lam_draw(-1.0, 1.0);
    c.sampled_strategies = 200;
    c.sampled_best = -inf;
    for (std::size_t rep = 0; rep < c.sampled_strategies; ++rep) {
        std::set<int> ks;
        int want = n_terms(rng);
        while (static_cast<int>(ks.size()) < want) ks.insert(k_draw(rng));
        std::vector<ShockTerm> terms;
        double xi = 0.0;
        for (int k : ks) {
            terms.push_back({k, lam_draw(rng)});
            xi += terms.back().lambda;
        }
        if (std::abs(xi) > 0.999) {
            double scale = 0.999 / std::abs(xi);
            for (ShockTerm& t : terms) t.lambda *= scale;
        }
        CleanCoeffs cc = clean_coeffs(m.truncation(), terms);
        c.sampled_best = std::max(c.sampled_best, -expected_exp_minus_z(m, cc));
    }
    return c;
}

Moment15Report moment15_variant(int truncation, int lattice_terms, double delta) {
    if (lattice_terms < 1)
        throw std::invalid_argument("moment variant: need at least one lattice term");
    if (delta <= 0.0 || !is_finite(delta))
        throw std::invalid_argument("moment variant: delta must be positive and finite");
    GapMarket base(truncation);
    const double p1 = base.probs()[base.index_of(1)];
    const double pm1 = base.probs()[base.index_of(-1)];

    std::vector<double> lp(static_cast<std::size_t>(lattice_terms));
    double lattice_mass = 0.0;
    for (int j = 1; j <= lattice_terms; ++j) {
        double jj = static_cast<double>(j);
        lp[static_cast<std::size_t>(j - 1)] = delta * std::exp(-1.5 * jj) / (jj * jj * jj);
        lattice_mass += lp[static_cast<std::size_t>(j - 1)];
    }
    if (lattice_mass >= base.probs()[base.index_of(0)])
        throw std::invalid_argument("moment variant: lattice mass exceeds the free state-0 mass");

    auto marginal = [&](double l) {  // E[X e^{-l X}] on the split market
        double v = p1 * std::exp(-l) - pm1 * std::exp(l);
        for (int j = 1; j <= lattice_terms; ++j)
            v -= lp[static_cast<std::size_t>(j - 1)] * static_cast<double>(j) *
                 std::exp(l * static_cast<double>(j));
        return v;
    };
    auto moment = [&](double l) {
        double v = p1 * std::exp(-l) + pm1 * std::exp(l) + (1.0 - p1 - pm1 - lattice_mass);
        for (int j = 1; j <= lattice_terms; ++j)
            v += lp[static_cast<std::size_t>(j - 1)] * std::exp(l * static_cast<double>(j));
        return v;
    };

    Moment15Report r;
    r.marginal_at_boundary = marginal(1.5);
    double drag = 0.0;
    for (int j = 1; j <= lattice_terms; ++j)
        drag -= lp[static_cast<std::size_t>(j - 1)] * static_cast<double>(j) *
                std::exp(1.5 * static_cast<double>(j));
    r.lattice_drag = drag;
    r.boundary_binding = r.marginal_at_boundary > 0.0;

    ScalarMin rough = golden_section_min(moment, -5.0, 5.0, 1e-12, 400);
    auto fp = [&](double l) { return -marginal(l); };
    r.lambda_hat = newton_polish(fp, rough.x, -5.0, 5.0, 1e-14, 80);
    return r;
}

orlicz::SeriesRandomVariable y_shock_series(int k) {
    const int start = std::max(k, 2);
    auto term = [start](std::size_t j) -> orlicz::SeriesTerm {
        double mm = static_cast<double>(start) + static_cast<double>(j / 2);
        double out = (j % 2 == 0) ? mm : -mm;
        return {out, std::exp(-mm)};
    };
    auto tail = [start](std::size_t j, double scale) -> std::optional<double> {
        double s = std::abs(scale);
        double m0 = static_cast<double>(start) + static_cast<double>(j / 2);
        if (s >= 1.0) return inf;  // e^{-m}(e^{sm}-1) stays bounded away from 0
        if (s == 0.0) return 0.0;
        double a = 1.0 - s;
        // Exact geometric remainder of sum 2 e^{-m}(e^{sm}-1) over m >= m0.
        double pairs = 2.0 * (std::exp(-a * m0) / (1.0 - std::exp(-a)) -
                              std::exp(-m0) / (1.0 - std::exp(-1.0)));
        if (j % 2 == 1) pairs -= std::exp(-m0) * std::expm1(s * m0);
        return std::max(pairs, 0.0);
    };
    return {term, tail};
}

}  // namespace duality::gap
