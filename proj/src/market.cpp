#include "duality/market.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "duality/lp.hpp"
#include "duality/scalar.hpp"

namespace duality::market {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double wdot(const std::vector<double>& w, const std::vector<double>& a,
            const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
    return s;
}

double norm_inf(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::fabs(v));
    return s;
}

/// Dykstra alternating projections onto the intersection of a coordinate
/// orthant (masked) and halfspaces <a_k, y>_w <= b_k in the diagonal-weighted
/// inner product. Exact for each piece, geometrically convergent overall.
struct Halfspace {
    std::vector<double> a;
    double b;
};

std::vector<double> dykstra_project(std::vector<double> y,
                                    const std::vector<Halfspace>& hs,
                                    const std::vector<char>& nonneg,
                                    const std::vector<double>& w, int cycles = 160) {
    const std::size_t n = y.size();
    std::vector<std::vector<double>> incr(hs.size() + 1, std::vector<double>(n, 0.0));
    for (int c = 0; c < cycles; ++c) {
        double moved = 0.0;
        for (std::size_t k = 0; k <= hs.size(); ++k) {
            std::vector<double> z(n);
            for (std::size_t i = 0; i < n; ++i) z[i] = y[i] + incr[k][i];
            std::vector<double> ynew(n);
            if (k == hs.size()) {
                for (std::size_t i = 0; i < n; ++i)
                    ynew[i] = nonneg[i] ? std::max(0.0, z[i]) : z[i];
            } else {
                double num = wdot(w, hs[k].a, z) - hs[k].b;
                double den = wdot(w, hs[k].a, hs[k].a);
                double t = (den > 0.0 && num > 0.0) ? num / den : 0.0;
                for (std::size_t i = 0; i < n; ++i) ynew[i] = z[i] - t * hs[k].a[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                incr[k][i] = z[i] - ynew[i];
                moved = std::max(moved, std::fabs(ynew[i] - y[i]));
                y[i] = ynew[i];
            }
        }
        if (moved < 1e-15) break;
    }
    return y;
}

constexpr double kDomainShrink = 1e-9;

}  // namespace

FiniteMarket::FiniteMarket(std::vector<double> probs, std::vector<Generator> generators,
                           std::vector<double> endowment) {
    if (probs.empty()) throw std::invalid_argument("empty state space");
    if (endowment.size() != probs.size())
        throw std::invalid_argument("endowment length mismatch");
    for (const auto& g : generators)
        if (g.payoff.size() != probs.size())
            throw std::invalid_argument("generator length mismatch");

    double mass = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("negative or NaN probability");
        mass += p;
    }
    if (std::fabs(mass - 1.0) > 1e-12)
        throw std::invalid_argument("probabilities sum to " + std::to_string(mass));

    // Null states are invisible to every expectation; drop them up front.
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] == 0.0) continue;
        probs_.push_back(probs[i]);
        endowment_.push_back(endowment[i]);
    }
    for (auto& g : generators) {
        Generator kept;
        kept.two_sided = g.two_sided;
        for (std::size_t i = 0; i < probs.size(); ++i)
            if (probs[i] > 0.0) kept.payoff.push_back(g.payoff[i]);
        if (norm_inf(kept.payoff) == 0.0)
            throw std::invalid_argument("generator vanishes on the support");
        generators_.push_back(std::move(kept));
    }
    if (probs_.empty()) throw std::invalid_argument("no state has positive probability");
}

double FiniteMarket::expectation(const std::vector<double>& claim) const {
    if (claim.size() != probs_.size())
        throw std::invalid_argument("claim length mismatch");
    return wdot(probs_, claim, std::vector<double>(claim.size(), 1.0));
}

std::vector<double> FiniteMarket::combine(const std::vector<double>& theta) const {
    if (theta.size() != generators_.size())
        throw std::invalid_argument("coefficient length mismatch");
    std::vector<double> x(probs_.size(), 0.0);
    for (std::size_t j = 0; j < generators_.size(); ++j)
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += theta[j] * generators_[j].payoff[i];
    return x;
}

ArbitrageReport check_no_arbitrage(const FiniteMarket& m) {
    const std::size_t n = m.n_states();

    // Separating density: y >= 1 with E[g y] <= 0 (= 0 when two-sided).
    LpProblem sep;
    std::vector<int> yv(n);
    for (std::size_t i = 0; i < n; ++i) yv[i] = sep.add_var(true);  // y = 1 + y'
    for (const auto& g : m.generators()) {
        std::vector<std::pair<int, double>> row;
        double base = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            row.push_back({yv[i], m.probs()[i] * g.payoff[i]});
            base += m.probs()[i] * g.payoff[i];
        }
        if (g.two_sided)
            sep.add_eq(row, -base);
        else
            sep.add_le(row, -base);
    }
    LpResult fs = sep.maximize({});

    // Arbitrage witness: max E[G theta] with G theta >= 0 and |theta| <= 1.
    LpProblem wit;
    std::vector<int> tv(m.n_generators());
    for (std::size_t j = 0; j < m.n_generators(); ++j)
        tv[j] = wit.add_var(!m.generators()[j].two_sided);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> row;
        for (std::size_t j = 0; j < m.n_generators(); ++j)
            row.push_back({tv[j], m.generators()[j].payoff[i]});
        wit.add_ge(row, 0.0);
    }
    for (std::size_t j = 0; j < m.n_generators(); ++j) {
        wit.add_le({{tv[j], 1.0}}, 1.0);
        if (m.generators()[j].two_sided) wit.add_le({{tv[j], -1.0}}, 1.0);
    }
    std::vector<std::pair<int, double>> obj;
    for (std::size_t j = 0; j < m.n_generators(); ++j) {
        double eg = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            eg += m.probs()[i] * m.generators()[j].payoff[i];
        obj.push_back({tv[j], eg});
    }
    LpResult ws = wit.maximize(obj);

    bool separated = fs.status == LpStatus::optimal;
    bool arbitraged = ws.status == LpStatus::optimal && ws.value > 1e-9;
    if (separated == arbitraged)
        throw std::logic_error("arbitrage alternative failed: both or neither LP solved");

    if (separated) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 + fs.x[i];
        return {true, std::move(y), "separating_density"};
    }
    std::vector<double> claim = m.combine(ws.x);
    for (double& c : claim) c = std::max(c, 0.0);  // clean LP rounding
    return {false, std::move(claim), "arbitrage_claim"};
}

namespace {

/// theta-space feasibility: sign constraints plus, when dom U is bounded
/// below, the componentwise box B + G theta >= lo + shrink.
struct ThetaFeasible {
    std::vector<Halfspace> hs;  // <a, theta> <= b, plain inner product
    std::vector<char> nonneg;
    std::vector<double> wunit;
};

ThetaFeasible theta_constraints(const FiniteMarket& m, const UtilitySpec& u,
                                double shrink) {
    ThetaFeasible f;
    const std::size_t k = m.n_generators();
    f.nonneg.resize(k);
    for (std::size_t j = 0; j < k; ++j) f.nonneg[j] = !m.generators()[j].two_sided;
    f.wunit.assign(k, 1.0);
    double lo = u.x_lower();
    if (is_finite(lo)) {
        for (std::size_t i = 0; i < m.n_states(); ++i) {
            Halfspace h;
            h.a.resize(k);
            for (std::size_t j = 0; j < k; ++j)
                h.a[j] = -m.generators()[j].payoff[i];
            h.b = m.endowment()[i] - lo - shrink;
            f.hs.push_back(std::move(h));
        }
    }
    return f;
}

std::vector<double> project_theta(const ThetaFeasible& f, std::vector<double> theta) {
    return dykstra_project(std::move(theta), f.hs, f.nonneg, f.wunit);
}

/// Interior starting point (and core-condition check) in the bounded-domain
/// case: maximize the uniform margin t with B + G theta >= lo + t.
std::vector<double> core_start(const FiniteMarket& m, const UtilitySpec& u) {
    double lo = u.x_lower();
    const std::size_t k = m.n_generators();
    if (!is_finite(lo)) return std::vector<double>(k, 0.0);

    LpProblem lp;
    std::vector<int> tv(k);
    for (std::size_t j = 0; j < k; ++j)
        tv[j] = lp.add_var(!m.generators()[j].two_sided);
    int margin = lp.add_var(false);
    for (std::size_t i = 0; i < m.n_states(); ++i) {
        std::vector<std::pair<int, double>> row;
        for (std::size_t j = 0; j < k; ++j)
            row.push_back({tv[j], m.generators()[j].payoff[i]});
        row.push_back({margin, -1.0});
        lp.add_ge(row, lo - m.endowment()[i]);
    }
    lp.add_le({{margin, 1.0}}, 10.0);  // cap: only the sign of the margin matters
    LpResult r = lp.maximize({{margin, 1.0}});
    if (r.status != LpStatus::optimal || r.value <= 1e-12)
        throw InfeasibleCore("no attainable claim keeps the endowment interior to dom U");
    std::vector<double> theta(r.x.begin(), r.x.begin() + static_cast<long>(k));
    return theta;
}

struct GoldenBracket {
    double lo, hi;
};

/// Feasible theta interval for the single-generator case.
GoldenBracket theta_interval(const FiniteMarket& m, const UtilitySpec& u) {
    double lo = -inf, hi = inf;
    if (!m.generators()[0].two_sided) lo = 0.0;
    double xl = u.x_lower();
    if (is_finite(xl)) {
        for (std::size_t i = 0; i < m.n_states(); ++i) {
            double g = m.generators()[0].payoff[i];
            double bound = xl + kDomainShrink - m.endowment()[i];
            if (g > 1e-300) {
                lo = std::max(lo, bound / g);
            } else if (g < -1e-300) {
                hi = std::min(hi, bound / g);
            } else if (bound > 0.0) {
                throw InfeasibleCore("endowment leaves dom U on a state the generator misses");
            }
        }
        if (lo > hi) throw InfeasibleCore("domain box empty for every coefficient");
    }
    return {lo, hi};
}

}  // namespace

PrimalSolution solve_primal(const FiniteMarket& m, const UtilitySpec& u, double tol) {
    ArbitrageReport arb = check_no_arbitrage(m);
    if (!arb.arbitrage_free)
        throw std::invalid_argument("market admits arbitrage; utility problem ill-posed");

    const std::size_t k = m.n_generators();
    const std::size_t n = m.n_states();
    const double usup = u.u_sup();

    auto value_at = [&](const std::vector<double>& theta) {
        std::vector<double> x = m.combine(theta);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double ui = u.value(m.endowment()[i] + x[i]);
            if (ui == -inf) return -inf;
            s += m.probs()[i] * ui;
        }
        return s;
    };

    PrimalSolution sol;
    sol.iterations = 0;

    if (k == 1) {
        GoldenBracket br = theta_interval(m, u);
        auto F = [&](double t) { return value_at({t}); };
        // Expand infinite ends until the objective bends over.
        double a = br.lo, b = br.hi;
        double seed = 0.0;
        if (is_finite(a) && is_finite(b)) {
            seed = 0.5 * (a + b);
        } else if (is_finite(a)) {
            seed = a + 1.0;
        } else if (is_finite(b)) {
            seed = b - 1.0;
        }
        double f_seed = F(seed);
        if (!is_finite(a)) {
            double step = 1.0;
            a = seed - step;
            while (F(a) > F(a + step) && step < 1e9) {
                step *= 2.0;
                a = seed - step;
            }
            if (step >= 1e9 && F(a) > f_seed + 1e-12 * (1.0 + std::fabs(f_seed)))
                throw UnboundedUtility("objective still improving at coefficient -1e9");
        }
        if (!is_finite(b)) {
            double step = 1.0;
            b = seed + step;
            while (F(b) > F(b - step) && step < 1e9) {
                step *= 2.0;
                b = seed + step;
            }
            if (step >= 1e9 && F(b) > f_seed + 1e-12 * (1.0 + std::fabs(f_seed)))
                throw UnboundedUtility("objective still improving at coefficient 1e9");
        }
        ScalarMin sm = golden_section_min([&](double t) { return -F(t); }, a, b, 1e-10);
        double theta = sm.x;
        // Newton polish on the first-order condition (smooth families).
        auto Fp = [&](double t) {
            double h = 1e-6 * (1.0 + std::fabs(t));
            return (F(t + h) - F(t - h)) / (2.0 * h);
        };
        double lo_cl = std::max(a, theta - 1e-3), hi_cl = std::min(b, theta + 1e-3);
        double polished = newton_polish(Fp, theta, lo_cl, hi_cl, 1e-13);
        if (F(polished) >= F(theta)) theta = polished;
        sol.theta = {theta};
        sol.iterations = sm.iterations;
    } else {
        std::vector<double> theta = core_start(m, u);
        ThetaFeasible feas = theta_constraints(m, u, kDomainShrink);
        theta = project_theta(feas, theta);

        auto grad_at = [&](const std::vector<double>& th) {
            std::vector<double> x = m.combine(th);
            std::vector<double> g(k, 0.0);
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t i = 0; i < n; ++i)
                    g[j] += m.probs()[i] * u.derivative(m.endowment()[i] + x[i]) *
                            m.generators()[j].payoff[i];
            return g;
        };

        double t = 1.0;
        double F0 = value_at(theta);
        int stall = 0;
        for (std::size_t iter = 0; iter < 4000; ++iter) {
            sol.iterations = iter + 1;
            std::vector<double> g = grad_at(theta);
            for (double& gj : g) gj = std::clamp(gj, -1e8, 1e8);

            std::vector<double> probe(k);
            for (std::size_t j = 0; j < k; ++j) probe[j] = theta[j] + g[j];
            probe = project_theta(feas, probe);
            double pg = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                pg = std::max(pg, std::fabs(probe[j] - theta[j]));
            if (pg < tol * (1.0 + norm_inf(theta))) break;

            double tn = norm_inf(theta);
            if (tn > 1e8) {
                if (usup == inf || F0 > usup - 1e-12)
                    throw UnboundedUtility("coefficients diverge with improving value");
                break;
            }

            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                std::vector<double> cand(k);
                for (std::size_t j = 0; j < k; ++j) cand[j] = theta[j] + t * g[j];
                cand = project_theta(feas, cand);
                double Fc = value_at(cand);
                double ip = 0.0;
                for (std::size_t j = 0; j < k; ++j) ip += g[j] * (cand[j] - theta[j]);
                if (is_finite(Fc) && Fc >= F0 + 1e-4 * ip) {
                    theta = std::move(cand);
                    F0 = Fc;
                    t = std::min(t * 1.5, 1e6);
                    accepted = true;
                    break;
                }
                t *= 0.5;
                if (t < 1e-18) break;
            }
            if (!accepted) {
                if (++stall >= 3) break;
                t = 1.0;
            } else {
                stall = 0;
            }
        }
        sol.theta = theta;
    }

    sol.x_hat = m.combine(sol.theta);
    sol.value = value_at(sol.theta);
    sol.boundary_flag = false;
    if (is_finite(u.x_lower())) {
        for (std::size_t i = 0; i < n; ++i) {
            double margin = m.endowment()[i] + sol.x_hat[i] - u.x_lower();
            if (margin < 1e-6) sol.boundary_flag = true;
        }
    }
    return sol;
}

std::string to_string(Completion c) {
    return c == Completion::full ? "full" : "effective";
}

namespace {

struct SupportDetail {
    double value;
    std::vector<double> theta;
    bool finite;
    std::vector<double> ray;  // cone direction proving divergence (claim space)
};

/// Exact support evaluation. Unbounded-below domain: polar membership test
/// (the supremum over a cone is 0 on the polar, +inf off it). Bounded-below
/// domain: LP over the polytope {theta : B + G theta >= lo}.
SupportDetail support_detail(const FiniteMarket& m, const UtilitySpec& u,
                             const std::vector<double>& y, double slack) {
    const std::size_t n = m.n_states();
    const std::size_t k = m.n_generators();
    SupportDetail out;
    out.theta.assign(k, 0.0);
    double eby = wdot(m.probs(), m.endowment(), y);
    double lo = u.x_lower();

    if (!is_finite(lo)) {
        double scale = 1.0 + norm_inf(y);
        for (std::size_t j = 0; j < k; ++j) {
            double c = wdot(m.probs(), m.generators()[j].payoff, y);
            bool bad = m.generators()[j].two_sided ? std::fabs(c) > slack * scale
                                                   : c > slack * scale;
            if (bad) {
                out.value = inf;
                out.finite = false;
                out.ray = m.generators()[j].payoff;
                if (m.generators()[j].two_sided && c < 0.0)
                    for (double& r : out.ray) r = -r;
                return out;
            }
        }
        out.value = eby;
        out.finite = true;
        return out;
    }

    LpProblem lp;
    std::vector<int> tv(k);
    for (std::size_t j = 0; j < k; ++j)
        tv[j] = lp.add_var(!m.generators()[j].two_sided);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> row;
        for (std::size_t j = 0; j < k; ++j)
            row.push_back({tv[j], m.generators()[j].payoff[i]});
        lp.add_ge(row, lo - m.endowment()[i]);
    }
    std::vector<std::pair<int, double>> obj;
    for (std::size_t j = 0; j < k; ++j)
        obj.push_back({tv[j], wdot(m.probs(), m.generators()[j].payoff, y)});
    LpResult r = lp.maximize(obj);
    if (r.status == LpStatus::infeasible)
        throw InfeasibleCore("no attainable claim keeps the endowment inside dom U");
    if (r.status == LpStatus::unbounded) {
        out.value = inf;
        out.finite = false;
        out.ray = m.combine(r.ray);
        return out;
    }
    out.value = eby + r.value;
    out.finite = true;
    out.theta = r.x;
    return out;
}

}  // namespace

SupportEval support_function(const FiniteMarket& m, const UtilitySpec& u,
                             const std::vector<double>& y) {
    SupportDetail d = support_detail(m, u, y, 1e-11);
    return {d.value, d.theta, d.finite};
}

double expected_conjugate(const FiniteMarket& m, const UtilitySpec& u,
                          const std::vector<double>& y) {
    ConjugatePair conj = conjugate(u);
    double s = 0.0;
    for (std::size_t i = 0; i < m.n_states(); ++i) {
        double vi = conj.v(y[i]);
        if (vi == inf) return inf;
        s += m.probs()[i] * vi;
    }
    return s;
}

DualSolution solve_dual(const FiniteMarket& m, const UtilitySpec& u, double tol) {
    ArbitrageReport arb = check_no_arbitrage(m);
    if (!arb.arbitrage_free)
        throw std::invalid_argument("market admits arbitrage; dual problem ill-posed");

    const std::size_t n = m.n_states();
    const std::size_t k = m.n_generators();
    ConjugatePair conj = conjugate(u);
    const bool boxed = is_finite(u.x_lower());

    // Projection geometry: orthant plus polar halfspaces E[(G d) Y] <= 0 in
    // the E-weighted inner product. Unbounded-below domains get the full
    // polar up front; boxed domains accumulate recession directions lazily.
    std::vector<Halfspace> cuts;
    auto push_cut = [&](const std::vector<double>& dir) {
        for (const auto& h : cuts) {
            double diff = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                diff = std::max(diff, std::fabs(h.a[i] - dir[i]));
                scale = std::max(scale, std::fabs(dir[i]));
            }
            if (diff <= 1e-9 * (1.0 + scale)) return false;
        }
        cuts.push_back({dir, 0.0});
        return true;
    };
    if (!boxed) {
        for (std::size_t j = 0; j < k; ++j) {
            push_cut(m.generators()[j].payoff);
            if (m.generators()[j].two_sided) {
                std::vector<double> neg = m.generators()[j].payoff;
                for (double& v : neg) v = -v;
                push_cut(neg);
            }
        }
    }
    std::vector<char> nn(n, 1);
    auto project = [&](std::vector<double> y) {
        return dykstra_project(std::move(y), cuts, nn, m.probs());
    };

    struct Eval {
        double d;
        std::vector<double> theta;
        bool finite;
    };
    auto evaluate = [&](const std::vector<double>& y) -> Eval {
        double iv = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double vi = conj.v(y[i]);
            if (vi == inf) return {inf, {}, false};
            iv += m.probs()[i] * vi;
        }
        SupportDetail sd = support_detail(m, u, y, 1e-7);
        if (!sd.finite) {
            if (boxed) push_cut(sd.ray);
            return {inf, {}, false};
        }
        return {iv + sd.value, sd.theta, true};
    };

    // Seed from the primal optimum: U'(B + X_hat) is the first-order dual
    // candidate, and the primal value doubles as a gap certificate. Falls
    // back to the endowment marginal when the primal route is unavailable.
    double primal_value = -inf;
    std::vector<double> y(n);
    bool seeded = false;
    try {
        PrimalSolution ps = solve_primal(m, u, tol);
        if (is_finite(ps.value) && ps.x_hat.size() == n) {
            bool ok = true;
            for (std::size_t i = 0; i < n; ++i) {
                double dv = u.derivative(m.endowment()[i] + ps.x_hat[i]);
                if (!is_finite(dv) || dv < 0.0) {
                    ok = false;
                    break;
                }
                y[i] = std::min(dv, 1e10);
            }
            if (ok) {
                primal_value = ps.value;
                seeded = true;
            }
        }
    } catch (const std::exception&) {
        // cold start below
    }
    if (!seeded)
        for (std::size_t i = 0; i < n; ++i)
            y[i] = std::clamp(u.derivative(m.endowment()[i]), 1e-6, 1e6);
    y = project(y);
    Eval cur = evaluate(y);
    for (int guard = 0; guard < 50 && !cur.finite; ++guard) {
        y = project(y);  // cuts may have grown; reproject and retry
        for (double& yi : y) yi = std::max(yi, 1e-9);
        cur = evaluate(y);
    }
    if (!cur.finite)
        throw DualDiverges("no feasible density with finite dual objective found");

    std::vector<double> best_y = y;
    double best_d = cur.d;
    std::vector<double> best_theta = cur.theta;

    double t = 1.0;
    int flat = 0;
    std::size_t iters = 0;
    for (std::size_t iter = 0; iter < 20000; ++iter) {
        iters = iter + 1;
        // Primal certificate: stop once weak duality is tight.
        if (is_finite(primal_value) &&
            best_d - primal_value <= std::max(tol, 1e-10) * (1.0 + std::fabs(best_d)))
            break;
        std::vector<double> x_of_theta = m.combine(cur.theta);
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            double vp = conj.v_prime(y[i]);
            g[i] = std::clamp(vp + m.endowment()[i] + x_of_theta[i], -1e8, 1e8);
        }
        // Diagonal curvature preconditioning (finite difference of V').
        std::vector<double> dir(n);
        for (std::size_t i = 0; i < n; ++i) {
            double h = 1e-6 * (1.0 + std::fabs(y[i]));
            double c = (conj.v_prime(y[i] + h) - conj.v_prime(std::max(y[i] - h, 0.0))) /
                       (2.0 * h);
            if (!is_finite(c))
                c = 1e12;  // curvature blow-up near a domain edge
            else
                c = std::clamp(c, 1e-8, 1e12);
            dir[i] = g[i] / c;
        }

        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<double> cand(n);
            for (std::size_t i = 0; i < n; ++i) cand[i] = y[i] - t * dir[i];
            cand = project(cand);
            Eval ce = evaluate(cand);
            double decrease = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                decrease += m.probs()[i] * g[i] * (y[i] - cand[i]);
            if (ce.finite && ce.d <= cur.d - 1e-4 * decrease) {
                y = std::move(cand);
                cur = ce;
                t = std::min(t * 1.4, 1e4);
                accepted = true;
                break;
            }
            t *= 0.5;
            if (t < 1e-18) break;
        }
        if (cur.d < best_d - 1e-15) {
            best_d = cur.d;
            best_y = y;
            best_theta = cur.theta;
            flat = 0;
        } else if (++flat > 60) {
            break;
        }
        if (!accepted) {
            // Nonsmooth conjugates (piecewise-linear utilities): diminishing
            // unpreconditioned steps, keeping the best iterate.
            double tau = 0.1 / std::sqrt(static_cast<double>(iter + 1));
            std::vector<double> cand(n);
            double gn = norm_inf(g) + 1e-300;
            for (std::size_t i = 0; i < n; ++i) cand[i] = y[i] - tau * g[i] / gn;
            cand = project(cand);
            Eval ce = evaluate(cand);
            if (ce.finite) {
                y = std::move(cand);
                cur = ce;
            }
            t = 1.0;
        }
        // Duality-gap certificate in the boxed case: theta* is primal feasible.
        if (boxed && cur.finite) {
            double lbv = 0.0;
            bool ok = true;
            std::vector<double> xw = m.combine(cur.theta);
            for (std::size_t i = 0; i < n; ++i) {
                double ui = u.value(m.endowment()[i] + xw[i]);
                if (ui == -inf) {
                    ok = false;
                    break;
                }
                lbv += m.probs()[i] * ui;
            }
            if (ok && cur.d - lbv <= std::max(tol, 1e-10) * (1.0 + std::fabs(cur.d)))
                break;
        }
    }

    DualSolution sol;
    sol.y_hat = best_y;
    sol.value = best_d;
    sol.iterations = iters;
    sol.endowment_term = wdot(m.probs(), m.endowment(), best_y);
    SupportDetail sd = support_detail(m, u, best_y, 1e-7);
    sol.support_term = sd.finite ? sd.value : inf;
    double cone_part = sol.support_term - sol.endowment_term;
    sol.completion = cone_part <= 1e-8 ? Completion::full : Completion::effective;
    double ey = 0.0;
    for (std::size_t i = 0; i < n; ++i) ey += m.probs()[i] * best_y[i];
    sol.q_hat.assign(n, 0.0);
    if (ey > 1e-300)
        for (std::size_t i = 0; i < n; ++i) sol.q_hat[i] = best_y[i] / ey;
    return sol;
}

CompleteMarketValue complete_market_value(const std::vector<double>& probs,
                                          const std::vector<double>& q,
                                          const UtilitySpec& u) {
    if (q.size() != probs.size()) throw std::invalid_argument("density length mismatch");
    double qmass = 0.0;
    for (double qi : q) {
        if (!(qi >= 0.0)) throw std::invalid_argument("negative or NaN density weight");
        qmass += qi;
    }
    if (qmass <= 0.0) throw std::invalid_argument("density has no mass");

    ConjugatePair conj = conjugate(u);
    std::vector<double> z(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!(probs[i] > 0.0)) throw std::invalid_argument("null state in probs");
        z[i] = q[i] / probs[i];
    }
    auto iv = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            double vi = conj.v(lambda * z[i]);
            if (vi == inf) return inf;
            s += probs[i] * vi;
        }
        return s;
    };

    double seed = 0.0;
    bool found = false;
    for (int e = -60; e <= 60 && !found; ++e) {
        double l = std::pow(2.0, e);
        if (is_finite(iv(l))) {
            seed = std::log(l);
            found = true;
        }
    }
    if (!found)
        throw NotBlissFree("I_V(lambda q) is infinite for every tested lambda");

    ScalarMin sm = golden_section_min([&](double t) { return iv(std::exp(t)); },
                                      seed - 90.0, seed + 90.0, 1e-12);
    double lam = std::exp(sm.x);
    auto phi_p = [&](double l) {
        double h = 1e-7 * (1.0 + std::fabs(l));
        return (iv(l + h) - iv(std::max(l - h, 1e-300))) / (2.0 * h);
    };
    double polished = newton_polish(phi_p, lam, lam * 0.5, lam * 2.0, 1e-13);
    if (iv(polished) <= iv(lam)) lam = polished;

    CompleteMarketValue out;
    out.lambda_hat = lam;
    out.value = iv(lam);

    if (u.family() == UtilityFamily::exponential) {
        double ez = 0.0, ezlz = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            ez += probs[i] * z[i];
            if (z[i] > 0.0) ezlz += probs[i] * z[i] * std::log(z[i]);
        }
        double closed = -ez * std::exp(-ezlz / ez) + u.offset();
        out.closed_form = closed;
        if (std::fabs(closed - out.value) > 1e-9 * (1.0 + std::fabs(closed)))
            throw std::logic_error("entropy closed form disagrees with minimization");
    }
    return out;
}

CornerReport classify_corner(const std::vector<double>& probs,
                             const std::vector<double>& endowment,
                             const PrimalSolution& p, const DualSolution& d,
                             const UtilitySpec& u, double corner_tol,
                             double agreement_tol) {
    const std::size_t n = probs.size();
    if (p.x_hat.size() != n || d.y_hat.size() != n || endowment.size() != n)
        throw std::invalid_argument("solution length mismatch");

    CornerReport rep;
    rep.corner_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        rep.corner_mass += probs[i] * p.x_hat[i] * u.derivative(endowment[i] + p.x_hat[i]);
    rep.support_cone_part = d.support_term - d.endowment_term;
    double agree = std::fabs(rep.corner_mass - rep.support_cone_part);
    if (agree > agreement_tol * (1.0 + std::fabs(rep.corner_mass)))
        throw std::runtime_error("corner bookkeeping mismatch: E[X U'(B+X)] = " +
                                 std::to_string(rep.corner_mass) +
                                 " vs cone support " +
                                 std::to_string(rep.support_cone_part));
    rep.corner = rep.corner_mass > corner_tol && rep.support_cone_part > corner_tol;

    ConjugatePair conj = conjugate(u);
    rep.max_fenchel_gap = 0.0;
    rep.max_pointwise_dev = 0.0;
    rep.subgradient_dependent = false;
    for (std::size_t i = 0; i < n; ++i) {
        double x = endowment[i] + p.x_hat[i];
        if (is_finite(u.x_lower()) && x < u.x_lower() + 1e-7) continue;
        double ux = u.value(x);
        if (!is_finite(ux)) continue;
        double yv = d.y_hat[i];
        double vv = conj.v(yv);
        if (is_finite(vv))
            rep.max_fenchel_gap =
                std::max(rep.max_fenchel_gap, std::fabs(ux - x * yv - vv));
        else
            rep.max_fenchel_gap = inf;

        bool at_kink = false;
        if (u.family() == UtilityFamily::piecewise_linear) {
            std::size_t nk = u.params().size() / 2;
            for (std::size_t j = 0; j < nk; ++j)
                if (std::fabs(x - u.params()[j]) < 1e-7) at_kink = true;
        }
        if (at_kink)
            rep.subgradient_dependent = true;
        else
            rep.max_pointwise_dev =
                std::max(rep.max_pointwise_dev, std::fabs(yv - u.derivative(x)));
    }
    double fen_tol = std::max(agreement_tol, 1e-6);
    if (rep.max_fenchel_gap > fen_tol * 100.0)
        throw std::runtime_error("dual density violates the pointwise conjugacy identity");
    return rep;
}

IndirectUtilityProfile indirect_utility_profile(const FiniteMarket& m,
                                                const UtilitySpec& u,
                                                const std::vector<double>& xs) {
    ArbitrageReport arb = check_no_arbitrage(m);
    if (!arb.arbitrage_free)
        throw std::invalid_argument("market admits arbitrage");
    UtilitySpec un = u.normalized();
    ConjugatePair conj = conjugate(un);
    const std::size_t n = m.n_states();
    const std::size_t k = m.n_generators();
    const double xl = un.x_lower();

    // Inner per-state maximization of U(z + w) - mu * U_hat(z / x).
    auto inner_state = [&](double w, double mu, double x) -> std::pair<double, double> {
        double zlo = -inf, zhi = inf;
        if (is_finite(xl)) {
            double r = std::fabs(xl) * x * (1.0 - 1e-9);
            zlo = -r;
            zhi = r;
            zlo = std::max(zlo, xl + 1e-9 - w);
            if (zlo >= zhi) return {zlo, un.value(zlo + w) - mu * conj.u_hat(zlo / x)};
        }
        auto neg = [&](double z) {
            double v = un.value(z + w);
            double pen = conj.u_hat(z / x);
            if (v == -inf || pen == inf) return inf;
            return -(v - mu * pen);
        };
        double a = is_finite(zlo) ? zlo : -1.0;
        double b = is_finite(zhi) ? zhi : 1.0;
        if (!is_finite(zlo)) {
            // neg is minimized: keep pushing left while the edge still sits
            // below its right neighbor (descent continues leftward).
            double step = 1.0;
            while (neg(a) < neg(a + step) && step < 1e7 * (1.0 + x)) {
                step *= 2.0;
                a -= step;
            }
        }
        if (!is_finite(zhi)) {
            double step = 1.0;
            while (neg(b) < neg(b - step) && step < 1e7 * (1.0 + x)) {
                step *= 2.0;
                b += step;
            }
            if (step >= 1e7 * (1.0 + x)) return {b, inf};  // inner sup diverges
        }
        ScalarMin sm = golden_section_min(neg, a, b, 1e-11);
        return {sm.x, -neg(sm.x)};
    };

    // L(mu) = max_theta sum p [U(z*+w) - mu U_hat(z*/x)] + mu.
    auto lagrangian = [&](double mu, double x) {
        std::vector<double> theta(k, 0.0);
        std::vector<char> nnmask(k);
        for (std::size_t j = 0; j < k; ++j) nnmask[j] = !m.generators()[j].two_sided;
        double val = 0.0;
        double step = 1.0;
        for (int it = 0; it < 300; ++it) {
            std::vector<double> w = m.combine(theta);
            for (std::size_t i = 0; i < n; ++i) w[i] += m.endowment()[i];
            std::vector<double> zs(n);
            val = mu;
            for (std::size_t i = 0; i < n; ++i) {
                auto [z, v] = inner_state(w[i], mu, x);
                if (v == inf) return inf;
                zs[i] = z;
                val += m.probs()[i] * v;
            }
            std::vector<double> g(k, 0.0);
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t i = 0; i < n; ++i)
                    g[j] += m.probs()[i] * un.derivative(zs[i] + w[i]) *
                            m.generators()[j].payoff[i];
            double gn = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                if (nnmask[j] && theta[j] <= 0.0 && g[j] < 0.0) continue;
                gn = std::max(gn, std::fabs(g[j]));
            }
            if (gn < 1e-8) break;
            bool ok = false;
            for (int ls = 0; ls < 40; ++ls) {
                std::vector<double> cand(k);
                for (std::size_t j = 0; j < k; ++j) {
                    cand[j] = theta[j] + step * g[j];
                    if (nnmask[j]) cand[j] = std::max(cand[j], 0.0);
                }
                std::vector<double> wc = m.combine(cand);
                double vc = mu;
                for (std::size_t i = 0; i < n; ++i) {
                    auto [z, v] = inner_state(wc[i] + m.endowment()[i], mu, x);
                    (void)z;
                    if (v == inf) return inf;
                    vc += m.probs()[i] * v;
                }
                if (vc > val + 1e-14) {
                    theta = std::move(cand);
                    step = std::min(step * 1.5, 1e4);
                    ok = true;
                    break;
                }
                step *= 0.5;
            }
            if (!ok) break;
        }
        return val;
    };

    IndirectUtilityProfile prof;
    for (double x : xs) {
        if (!(x > 0.0)) throw std::invalid_argument("budgets must be positive");
        ScalarMin sm = golden_section_min(
            [&](double t) { return lagrangian(std::exp(t), x); }, std::log(1e-9),
            std::log(1e9), 1e-9);
        double val = lagrangian(std::exp(sm.x), x);
        prof.rows.push_back({x, val, val / x});
    }
    bool mono = true;
    for (std::size_t i = 1; i < prof.rows.size(); ++i)
        mono = mono && prof.rows[i].ratio <=
                           prof.rows[i - 1].ratio + 1e-9 * (1.0 + std::fabs(prof.rows[i].ratio));
    double first = prof.rows.front().ratio, last = prof.rows.back().ratio;
    bool decayed = last <= 1e-12 || (is_finite(last) && last < 0.5 * first);
    prof.sublinear = mono && decayed;
    return prof;
}

TwoLambdaBoundReport two_lambda_bound_check(const FiniteMarket& m, const UtilitySpec& u,
                                            const std::vector<double>& y_tilde,
                                            double lambda1, double lambda2,
                                            std::size_t n_samples, std::uint64_t seed) {
    if (!(lambda2 > lambda1 && lambda1 > 0.0))
        throw std::invalid_argument("need lambda2 > lambda1 > 0");
    ConjugatePair conj = conjugate(u);
    const std::size_t n = m.n_states();
    auto iv_at = [&](double lam) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double vi = conj.v(lam * y_tilde[i]);
            if (vi == inf) return inf;
            s += m.probs()[i] * vi;
        }
        return s;
    };
    double iv1 = iv_at(lambda1), iv2 = iv_at(lambda2);
    if (!is_finite(iv1) || !is_finite(iv2))
        throw std::invalid_argument("lambda_i y_tilde outside dom I_V");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uth(-2.0, 2.0);
    std::uniform_real_distribution<double> us(0.0, 1.0);

    TwoLambdaBoundReport rep;
    rep.holds = true;
    rep.worst_margin = inf;
    rep.n_checked = 0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        std::vector<double> theta(m.n_generators());
        for (std::size_t j = 0; j < m.n_generators(); ++j) {
            theta[j] = uth(rng);
            if (!m.generators()[j].two_sided) theta[j] = std::fabs(theta[j]);
        }
        std::vector<double> x = m.combine(theta);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += m.endowment()[i];
            if (us(rng) < 0.3) x[i] -= us(rng);  // slack
        }
        double lhs = 0.0;
        bool finite_lhs = true;
        for (std::size_t i = 0; i < n; ++i) {
            double ui = u.value(x[i]);
            if (ui == -inf) {
                finite_lhs = false;
                break;
            }
            lhs += m.probs()[i] * ui;
        }
        if (!finite_lhs) continue;  // I_U = -inf: bound holds trivially
        double exy = 0.0, exmy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            exy += m.probs()[i] * x[i] * y_tilde[i];
            exmy += m.probs()[i] * std::max(-x[i], 0.0) * y_tilde[i];
        }
        double rhs = iv1 + iv2 + lambda1 * exy - (lambda2 - lambda1) * exmy;
        double margin = rhs - lhs;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -1e-9 * (1.0 + std::fabs(rhs))) {
            rep.holds = false;
            rep.witness_x = x;
        }
        ++rep.n_checked;
    }
    return rep;
}

FiniteMarket make_random_market(std::size_t n_states, std::size_t n_generators,
                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> up(0.2, 1.0);
    std::normal_distribution<double> gn(0.0, 1.0);
    std::uniform_real_distribution<double> ub(-0.3, 0.3);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    for (int attempt = 0; attempt < 400; ++attempt) {
        std::vector<double> probs(n_states);
        double mass = 0.0;
        for (double& p : probs) {
            p = up(rng);
            mass += p;
        }
        for (double& p : probs) p /= mass;
        // Renormalize exactly (sum of divided terms can be off by 1 ulp).
        double s2 = 0.0;
        for (double p : probs) s2 += p;
        probs[0] += 1.0 - s2;

        std::vector<Generator> gens(n_generators);
        bool ok = true;
        for (auto& g : gens) {
            g.two_sided = u01(rng) < 0.7;
            g.payoff.resize(n_states);
            double amax = 0.0;
            for (double& v : g.payoff) {
                v = gn(rng);
                amax = std::max(amax, std::fabs(v));
            }
            if (amax < 0.1) ok = false;
        }
        if (!ok) continue;
        std::vector<double> endow(n_states);
        for (double& b : endow) b = ub(rng);

        FiniteMarket m(probs, gens, endow);
        if (check_no_arbitrage(m).arbitrage_free) return m;
    }
    throw std::runtime_error("could not sample an arbitrage-free market");
}

}  // namespace duality::market
