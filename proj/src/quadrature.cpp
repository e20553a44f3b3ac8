#include "duality/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace duality {
namespace {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 constants).
constexpr double xgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double wgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

Interval gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double result_g = fc * wg[3];
    double result_k = fc * wgk[7];
    for (int j = 0; j < 7; ++j) {
        double x = h * xgk[j];
        double f1 = f(c - x);
        double f2 = f(c + x);
        result_k += wgk[j] * (f1 + f2);
        if (j % 2 == 1) result_g += wg[j / 2] * (f1 + f2);
    }
    result_k *= h;
    result_g *= h;
    double err = std::fabs(result_k - result_g);
    // QUADPACK-style error sharpening
    if (err != 0.0) err = std::pow(200.0 * err, 1.5) * 0.01;
    return {a, b, result_k, err};
}

QuadResult run(const std::function<double(double)>& f,
               std::vector<Interval> seed, double abs_tol, double rel_tol,
               int max_intervals) {
    std::priority_queue<Interval> q(seed.begin(), seed.end());
    double total = 0.0, toterr = 0.0;
    for (const auto& iv : seed) {
        total += iv.value;
        toterr += iv.error;
    }
    int evals = 15 * static_cast<int>(seed.size());
    int n = static_cast<int>(seed.size());
    while (toterr > abs_tol && toterr > rel_tol * std::fabs(total)) {
        if (n >= max_intervals || q.empty())
            throw QuadratureFailure("adaptive quadrature: tolerance not reached");
        Interval worst = q.top();
        q.pop();
        double m = 0.5 * (worst.a + worst.b);
        if (m <= worst.a || m >= worst.b)
            throw QuadratureFailure("adaptive quadrature: interval underflow");
        Interval l = gk15(f, worst.a, m);
        Interval r = gk15(f, m, worst.b);
        total += l.value + r.value - worst.value;
        toterr += l.error + r.error - worst.error;
        q.push(l);
        q.push(r);
        evals += 30;
        ++n;
    }
    if (!std::isfinite(total))
        throw QuadratureFailure("adaptive quadrature: non-finite integrand");
    return {total, toterr, evals};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, double rel_tol, int max_intervals) {
    if (a == b) return {0.0, 0.0, 0};
    return run(f, {gk15(f, a, b)}, abs_tol, rel_tol, max_intervals);
}

QuadResult integrate_seeded(const std::function<double(double)>& f,
                            const std::vector<double>& breakpoints,
                            double abs_tol, double rel_tol, int max_intervals) {
    if (breakpoints.size() < 2)
        throw std::invalid_argument("integrate_seeded: need at least 2 breakpoints");
    std::vector<Interval> seed;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::invalid_argument("integrate_seeded: breakpoints not increasing");
        seed.push_back(gk15(f, breakpoints[i], breakpoints[i + 1]));
    }
    return run(f, std::move(seed), abs_tol, rel_tol, max_intervals);
}

std::vector<double> geometric_mesh(double a, double b, double step) {
    std::vector<double> pts{a};
    double x = a;
    while (x * step < b) {
        x *= step;
        pts.push_back(x);
    }
    pts.push_back(b);
    return pts;
}

}  // namespace duality
