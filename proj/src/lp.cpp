#include "duality/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace duality {
namespace {

constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-11;

struct Tableau {
    int m, ncols;              // constraint rows, total columns (excluding rhs)
    std::vector<std::vector<double>> t;  // m+2 rows: constraints, obj, phase1 obj
    std::vector<int> basis;
    std::vector<bool> banned;  // artificial columns, never re-enter

    double& rhs(int i) { return t[i][ncols]; }

    void pivot(int r, int col) {
        double p = t[r][col];
        for (double& v : t[r]) v /= p;
        for (int i = 0; i < m + 2; ++i) {
            if (i == r) continue;
            double f = t[i][col];
            if (f == 0.0) continue;
            for (int j = 0; j <= ncols; ++j) t[i][j] -= f * t[r][j];
            t[i][col] = 0.0;  // kill roundoff residue on the pivot column
        }
        t[r][col] = 1.0;
        basis[r] = col;
    }

    // Bland's rule iteration on objective row `obj_row`.
    // Returns: 0 optimal, 1 pivoted, -1 unbounded (entering stored in *ucol).
    int step(int obj_row, int* ucol) {
        int enter = -1;
        for (int j = 0; j < ncols; ++j) {
            if (banned[j]) continue;
            if (t[obj_row][j] > kCostTol) { enter = j; break; }
        }
        if (enter < 0) return 0;
        int leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            if (t[i][enter] > kPivotTol) {
                double ratio = rhs(i) / t[i][enter];
                if (ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
                    best = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) {
            if (ucol) *ucol = enter;
            return -1;
        }
        pivot(leave, enter);
        return 1;
    }
};

}  // namespace

LpResult solve_lp(const std::vector<double>& c,
                  const std::vector<std::vector<double>>& A_ub,
                  const std::vector<double>& b_ub,
                  const std::vector<std::vector<double>>& A_eq,
                  const std::vector<double>& b_eq) {
    const int n = static_cast<int>(c.size());
    const int m1 = static_cast<int>(A_ub.size());
    const int m2 = static_cast<int>(A_eq.size());
    const int m = m1 + m2;

    // Column layout: structural | slacks (one per ub row) | artificials.
    int n_art = m2;
    for (int i = 0; i < m1; ++i)
        if (b_ub[i] < 0.0) ++n_art;
    const int ncols = n + m1 + n_art;

    Tableau tb;
    tb.m = m;
    tb.ncols = ncols;
    tb.t.assign(m + 2, std::vector<double>(ncols + 1, 0.0));
    tb.basis.assign(m, -1);
    tb.banned.assign(ncols, false);

    int art = n + m1;
    for (int i = 0; i < m1; ++i) {
        double sgn = b_ub[i] < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) tb.t[i][j] = sgn * A_ub[i][j];
        tb.t[i][n + i] = sgn;  // slack
        tb.t[i][ncols] = sgn * b_ub[i];
        if (sgn < 0.0) {
            tb.t[i][art] = 1.0;
            tb.basis[i] = art++;
        } else {
            tb.basis[i] = n + i;
        }
    }
    for (int k = 0; k < m2; ++k) {
        int i = m1 + k;
        double sgn = b_eq[k] < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) tb.t[i][j] = sgn * A_eq[k][j];
        tb.t[i][ncols] = sgn * b_eq[k];
        tb.t[i][art] = 1.0;
        tb.basis[i] = art++;
    }

    // Objective rows: row m holds phase-2 reduced costs (initial basis has zero
    // cost so the row is just c); row m+1 holds phase-1 reduced costs, i.e. the
    // sum of rows whose basic variable is artificial.
    for (int j = 0; j < n; ++j) tb.t[m][j] = c[j];
    for (int i = 0; i < m; ++i) {
        if (tb.basis[i] >= n + m1) {
            for (int j = 0; j <= ncols; ++j) tb.t[m + 1][j] += tb.t[i][j];
            tb.t[m + 1][tb.basis[i]] = 0.0;
        }
    }

    // Phase 1
    if (n_art > 0) {
        while (true) {
            int r = tb.step(m + 1, nullptr);
            if (r == 0) break;
            if (r < 0)  // phase-1 objective is bounded by 0; cannot happen
                return {LpStatus::infeasible, 0.0, {}, {}};
        }
        if (tb.rhs(m + 1) > 1e-7) return {LpStatus::infeasible, 0.0, {}, {}};
        // Drive leftover artificials out of the basis where possible.
        for (int i = 0; i < m; ++i) {
            if (tb.basis[i] >= n + m1) {
                int col = -1;
                for (int j = 0; j < n + m1; ++j)
                    if (std::fabs(tb.t[i][j]) > 1e-8) { col = j; break; }
                if (col >= 0) tb.pivot(i, col);
            }
        }
        for (int j = n + m1; j < ncols; ++j) tb.banned[j] = true;
    }

    // Phase 2
    while (true) {
        int ucol = -1;
        int r = tb.step(m, &ucol);
        if (r == 0) break;
        if (r < 0) {
            LpResult res;
            res.status = LpStatus::unbounded;
            std::vector<double> d(ncols, 0.0);
            d[ucol] = 1.0;
            for (int i = 0; i < m; ++i) d[tb.basis[i]] = -tb.t[i][ucol];
            res.ray.assign(d.begin(), d.begin() + n);
            return res;
        }
    }

    LpResult res;
    res.status = LpStatus::optimal;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (tb.basis[i] < n) res.x[tb.basis[i]] = tb.rhs(i);
    res.value = -tb.rhs(m);
    return res;
}

int LpProblem::add_var(bool nonnegative) {
    nonneg_.push_back(nonnegative);
    return static_cast<int>(nonneg_.size()) - 1;
}

void LpProblem::add_le(const std::vector<std::pair<int, double>>& coeffs, double rhs) {
    rows_.push_back({coeffs, rhs, false});
}

void LpProblem::add_ge(const std::vector<std::pair<int, double>>& coeffs, double rhs) {
    auto neg = coeffs;
    for (auto& [i, v] : neg) v = -v;
    rows_.push_back({neg, -rhs, false});
}

void LpProblem::add_eq(const std::vector<std::pair<int, double>>& coeffs, double rhs) {
    rows_.push_back({coeffs, rhs, true});
}

LpResult LpProblem::maximize(const std::vector<std::pair<int, double>>& obj) const {
    // Map user variables to solver columns: nonnegative -> one column,
    // free -> positive/negative split.
    const int nu = static_cast<int>(nonneg_.size());
    std::vector<int> pos(nu), neg(nu, -1);
    int ncol = 0;
    for (int i = 0; i < nu; ++i) {
        pos[i] = ncol++;
        if (!nonneg_[i]) neg[i] = ncol++;
    }
    auto expand = [&](const std::vector<std::pair<int, double>>& coeffs) {
        std::vector<double> row(ncol, 0.0);
        for (auto [i, v] : coeffs) {
            row[pos[i]] += v;
            if (neg[i] >= 0) row[neg[i]] -= v;
        }
        return row;
    };

    std::vector<double> c = expand(obj);
    std::vector<std::vector<double>> A_ub, A_eq;
    std::vector<double> b_ub, b_eq;
    for (const auto& r : rows_) {
        if (r.equality) {
            A_eq.push_back(expand(r.coeffs));
            b_eq.push_back(r.rhs);
        } else {
            A_ub.push_back(expand(r.coeffs));
            b_ub.push_back(r.rhs);
        }
    }

    LpResult raw = solve_lp(c, A_ub, b_ub, A_eq, b_eq);
    LpResult out;
    out.status = raw.status;
    out.value = raw.value;
    auto collapse = [&](const std::vector<double>& v) {
        std::vector<double> u(nu, 0.0);
        for (int i = 0; i < nu; ++i) {
            u[i] = v[pos[i]];
            if (neg[i] >= 0) u[i] -= v[neg[i]];
        }
        return u;
    };
    if (raw.status == LpStatus::optimal) out.x = collapse(raw.x);
    if (raw.status == LpStatus::unbounded) out.ray = collapse(raw.ray);
    return out;
}

}  // namespace duality
