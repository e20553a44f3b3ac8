#include "duality/levy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>

#include "duality/extended.hpp"
#include "duality/quadrature.hpp"
#include "duality/scalar.hpp"

namespace duality::levy {

namespace {

const double kC0 = 3.0 / (4.0 * std::sqrt(std::numbers::pi));  // density prefactor
constexpr double kHead = 1e-6;  // series-expanded neighborhood of 0
constexpr double kCut = 60.0;   // switch to analytic power tails

/// Density of the absolutely continuous jump part.
double f_ts(double x) { return kC0 * std::pow(x, -2.5) * std::exp(-x); }

/// (4 sqrt(pi)/3) x^{5/2}: the reciprocal density without its exponential.
double pow52(double x) { return std::pow(x, 2.5) / kC0; }

/// int_0^eps (e^{vx}-1-vx) e^{-x} x^{-5/2} c0 dx by series (3 terms).
double head_compensated(double v, double eps) {
    double a = v * v / 2.0;
    double b = v * v * v / 6.0 - v * v / 2.0;
    double c = v * v * v * v / 24.0 - v * v * v / 6.0 + v * v / 4.0;
    double r = std::sqrt(eps);
    return kC0 * (2.0 * a * r + (2.0 / 3.0) * b * r * eps + (2.0 / 5.0) * c * r * eps * eps);
}

/// int_0^eps x (e^x - 1) f dx = c0 int (1 - e^{-x}) x^{-3/2} dx by series.
double head_moment(double eps) {
    double r = std::sqrt(eps);
    return kC0 * (2.0 * r - eps * r / 3.0 + eps * eps * r / 15.0);
}

/// int x (e^x - 1) f dx over (0, inf): series head, seeded Gauss-Kronrod,
/// exact power tail c0 * 2 X^{-1/2} (the e^{-x} remainder is ~1e-28 at 60).
double moment_quadrature() {
    auto integrand = [](double x) {
        return kC0 * (1.0 - std::exp(-x)) * std::pow(x, -1.5);
    };
    QuadResult mid = integrate_seeded(integrand, geometric_mesh(kHead, kCut));
    double tail = kC0 * 2.0 / std::sqrt(kCut);
    return head_moment(kHead) + mid.value + tail;
}

struct WindowIntegrals {
    double b_n;        // int_w log-term f
    double c_n;        // int_w W_n log-term f
    double kn_mass;    // int_w K_n (4sqrt(pi)/3) x^{5/2} f = K_n * 1
    double kn_xmass;   // int_w x K_n ... = K_n (n + 1/2)
};

/// All window integrals on [n, n+1]. W_n f is evaluated in the cancellation-
/// free form c0 x^{-5/2}(1 - e^{-x}) + K_n.
WindowIntegrals window_integrals(double k_n, int n) {
    double a = n, b = n + 1.0;
    auto logterm = [&](double x) { return std::log1p(k_n * pow52(x)); };
    WindowIntegrals w;
    w.b_n = integrate([&](double x) { return logterm(x) * f_ts(x); }, a, b).value;
    w.c_n = integrate(
                [&](double x) {
                    double wf = kC0 * std::pow(x, -2.5) * (1.0 - std::exp(-x)) + k_n;
                    return wf * logterm(x);
                },
                a, b)
                .value;
    w.kn_mass = integrate([&](double x) { (void)x; return k_n; }, a, b).value;
    w.kn_xmass = integrate([&](double x) { return k_n * x; }, a, b).value;
    return w;
}

int thread_budget(int rows) {
    int want = 1;
    if (const char* env = std::getenv("ORLICZ_DUALITY_THREADS")) {
        want = std::atoi(env);
        if (want < 1) want = 1;
    }
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    return std::min({want, hw, rows, 8});
}

}  // namespace

LevyModel::LevyModel(double bx, double T) : b_x(bx), horizon(T) {
    if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!std::isfinite(bx)) throw std::invalid_argument("drift must be finite");
}

double LevyModel::threshold() { return -2.0 + 0.5 / std::sqrt(std::numbers::e); }

double LevyModel::A() const { return -(b_x + 2.0 - 0.5 / std::sqrt(std::numbers::e)); }

double cumulant(const LevyModel& m, double v) {
    if (v > 1.0) return inf;
    return std::exp(-v / 2.0) + std::pow(1.0 - v, 1.5) - 2.0 + (2.0 + m.b_x) * v;
}

double cumulant_derivative(const LevyModel& m, double v) {
    if (v > 1.0) throw std::invalid_argument("cumulant infinite beyond order 1");
    return -0.5 * std::exp(-v / 2.0) - 1.5 * std::sqrt(1.0 - v) + 2.0 + m.b_x;
}

double cumulant_by_quadrature(const LevyModel& m, double v) {
    if (v > 1.0) return inf;
    double atom = std::exp(-v / 2.0) - 1.0 + v / 2.0;
    if (v == 0.0) return atom;  // compensated integrand vanishes identically

    double ts;
    // (e^{vx}-1-vx) e^{-x} in damped form: the naive product overflows to
    // inf * 0 once vx passes ~709 even though the result is tiny.
    auto integrand = [&](double x) {
        double vx = v * x;
        if (vx > 690.0)
            return kC0 * std::pow(x, -2.5) *
                   (std::exp(-(1.0 - v) * x) - std::exp(-x) * (1.0 + vx));
        return f_ts(x) * (std::expm1(vx) - vx);
    };
    if (std::fabs(1.0 - v) <= 1e-12) {
        // Exact power tail: integrand -> c0 x^{-5/2}(1 - (1+x)e^{-x}).
        QuadResult mid = integrate_seeded(integrand, geometric_mesh(kHead, kCut));
        double tail = kC0 * (2.0 / 3.0) * std::pow(kCut, -1.5);
        ts = head_compensated(v, kHead) + mid.value + tail;
    } else if (v < 1.0 - 6e-4) {
        double cut = std::min(1e5, kCut / std::max(1.0 - v, 6e-4));
        QuadResult mid = integrate_seeded(integrand, geometric_mesh(kHead, cut));
        ts = head_compensated(v, kHead) + mid.value;  // e^{-(1-v)x} tail < 1e-16 rel
    } else {
        double cut = 1e5;
        QuadResult mid = integrate_seeded(integrand, geometric_mesh(kHead, cut));
        double tail = kC0 * (2.0 / 3.0) * std::pow(cut, -1.5) *
                      std::exp(-(1.0 - v) * cut);
        ts = head_compensated(v, kHead) + mid.value + tail;
    }
    return m.b_x * v + atom + ts;
}

double ts_moment_x_expm1() { return moment_quadrature(); }

double moment_identity_total() {
    // atom contribution: x (e^x - 1) at x = -1/2.
    double atom = -0.5 * (std::exp(-0.5) - 1.0);
    return moment_quadrature() + atom;
}

CornerAnalysis corner_analysis(const LevyModel& m) {
    CornerAnalysis out;
    out.a_closed = m.A();
    // kappa'(1) = b_x + int x(e^x - 1) dF over the full jump measure.
    out.a_quadrature = -(m.b_x + moment_identity_total());

    if (!m.corner_assumption_holds()) {
        // kappa' is increasing with kappa'(v) -> -inf as v -> -inf and
        // kappa'(1) >= 0: the first-order condition has a root at or below 1.
        double root = find_root([&](double v) { return cumulant_derivative(m, v); },
                                -50.0, 1.0, 1e-12);
        throw InteriorOptimum(
            "drift " + std::to_string(m.b_x) +
                " admits an interior optimum at exposure " + std::to_string(-root),
            root);
    }
    out.interior_root = std::nullopt;
    out.optimal_theta = -1.0;
    out.value = -std::exp(cumulant(m, 1.0) * m.horizon);
    return out;
}

namespace {

DualSequenceRow compute_row(const LevyModel& m, int n, double moment_quad) {
    DualSequenceRow row;
    row.n = n;
    row.k_n = m.A() / (n + 0.5);
    WindowIntegrals w = window_integrals(row.k_n, n);
    row.b_n = w.b_n;
    row.c_n = w.c_n;

    double atom_w = std::exp(-0.5) - 1.0;  // W_n at the atom (indicator off)
    // b^L = b_x + int (W_n - x) dF: compensated moment at v=1 plus the K_n
    // window mass, plus the atom.
    double comp1 = cumulant_by_quadrature(m, 1.0) - m.b_x - (atom_w + 0.5);
    row.drift_l = m.b_x + comp1 + w.kn_mass + (atom_w + 0.5);

    // int x W_n dF (martingale condition): moment integral + K_n (n + 1/2)
    // window mass + atom.
    double x_w_mass = moment_quad + w.kn_xmass + (-0.5) * atom_w;
    row.residual_b2 = m.b_x + x_w_mass;

    // b^{ln Z}_Q = (b_x + B_n) + int W_n ln(1 + W_n) dF, the latter being
    // int x W_n dF + C_n (the log splits exactly into x plus the window term).
    row.drift_lnz_q = m.b_x + row.b_n + x_w_mass + row.c_n;

    double kappa1 = cumulant(m, 1.0);
    row.value = -std::exp((kappa1 + row.k_n - row.b_n - row.c_n) * m.horizon);
    row.value_entropy_route =
        -std::exp((row.drift_l - row.drift_lnz_q) * m.horizon);
    return row;
}

}  // namespace

std::vector<DualSequenceRow> dual_sequence(const LevyModel& m, int n_max) {
    if (n_max < 1) throw std::invalid_argument("need at least one sequence row");
    if (!m.corner_assumption_holds())
        corner_analysis(m);  // throws InteriorOptimum with the root

    double moment_quad = moment_quadrature();
    std::vector<DualSequenceRow> rows(static_cast<std::size_t>(n_max));
    int workers = thread_budget(n_max);
    if (workers <= 1) {
        for (int n = 1; n <= n_max; ++n)
            rows[static_cast<std::size_t>(n - 1)] = compute_row(m, n, moment_quad);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&, t]() {
                for (int n = 1 + t; n <= n_max; n += workers)
                    rows[static_cast<std::size_t>(n - 1)] =
                        compute_row(m, n, moment_quad);
            });
        }
        for (auto& th : pool) th.join();
    }
    return rows;
}

DeflatorReport deflator_nonexistence(const LevyModel& m, double c, double x_t,
                                     double t) {
    if (!(c >= 0.0)) throw std::invalid_argument("floor c must be nonnegative");
    if (!(t >= 0.0 && t < m.horizon))
        throw std::invalid_argument("need 0 <= t < horizon");
    if (!m.corner_assumption_holds()) corner_analysis(m);  // throws

    DeflatorReport rep;
    double rem = m.horizon - t;
    rep.drift_quadrature = m.b_x + moment_identity_total();  // kappa'(1) = -A
    double a = m.A();
    rep.window_lo = c;
    rep.window_hi = c + a * rem;
    // E_t[(c - X_T) e^{X_T}] = e^{x_t + kappa(1)(T-t)} (c - x_t + A(T-t)).
    rep.left_side =
        std::exp(x_t + cumulant(m, 1.0) * rem) * (c - x_t + a * rem);
    bool in_window = (x_t > rep.window_lo) && (x_t < rep.window_hi);
    rep.verdict = in_window ? DeflatorVerdict::contradiction
                            : DeflatorVerdict::no_contradiction;
    return rep;
}

}  // namespace duality::levy
