#include "duality/convex_grid.hpp"

#include <algorithm>
#include <cmath>

namespace duality::grid {

namespace {

/// Negate values, flip shape; maps concave problems onto convex code paths.
GridFunction negated(const GridFunction& f) {
    std::vector<double> v(f.values().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = -f.values()[i];
    return GridFunction(f.grid(), std::move(v),
                        f.shape() == Shape::convex ? Shape::concave : Shape::convex);
}

void require_proper_convex_values(const GridFunction& f) {
    std::size_t finite = 0;
    for (double v : f.values()) {
        if (v == -inf) throw ImproperFunction("convex function taking -inf is improper");
        if (is_finite(v)) ++finite;
    }
    if (finite == 0) throw ImproperFunction("no finite values on the grid");
}

/// max_x(xy - f(x)) over finite values of a convex grid function.
double convex_conjugate_at(const GridFunction& f, double y) {
    double best = -inf;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double v = f.values()[i];
        if (!is_finite(v)) continue;
        best = std::max(best, y * f.grid()[i] - v);
    }
    return best;
}

}  // namespace

GridFunction::GridFunction(std::vector<double> grid, std::vector<double> values,
                           Shape shape)
    : grid_(std::move(grid)), values_(std::move(values)), shape_(shape) {
    if (grid_.size() != values_.size())
        throw std::invalid_argument("grid/value size mismatch");
    if (grid_.size() < 3) throw std::invalid_argument("grid needs at least 3 points");
    std::size_t finite = 0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!is_finite(grid_[i])) throw std::invalid_argument("grid points must be finite");
        if (i > 0 && grid_[i] <= grid_[i - 1])
            throw std::invalid_argument("grid must be strictly increasing");
        if (std::isnan(values_[i])) throw std::invalid_argument("NaN value on grid");
        if (is_finite(values_[i])) ++finite;
    }
    if (finite < 3) throw std::invalid_argument("need at least 3 finite values");
}

bool GridFunction::shape_consistent(double tol) const {
    // Divided differences over maximal finite runs must be monotone.
    double scale = 0.0;
    for (double v : values_)
        if (is_finite(v)) scale = std::max(scale, std::fabs(v));
    double slack = tol * (1.0 + scale);
    for (std::size_t i = 0; i + 2 < grid_.size(); ++i) {
        if (!is_finite(values_[i]) || !is_finite(values_[i + 1]) ||
            !is_finite(values_[i + 2]))
            continue;
        double d1 = (values_[i + 1] - values_[i]) / (grid_[i + 1] - grid_[i]);
        double d2 = (values_[i + 2] - values_[i + 1]) / (grid_[i + 2] - grid_[i + 1]);
        double bend = (shape_ == Shape::convex) ? d2 - d1 : d1 - d2;
        if (bend < -slack) return false;
    }
    return true;
}

double GridFunction::spacing() const {
    double h = grid_[1] - grid_[0];
    for (std::size_t i = 1; i + 1 < grid_.size(); ++i)
        if (std::fabs(grid_[i + 1] - grid_[i] - h) > 1e-12 * (1.0 + std::fabs(h)))
            throw std::invalid_argument("grid is not uniform");
    return h;
}

GridFunction grid_conjugate(const GridFunction& f, const std::vector<double>& dual_grid) {
    if (dual_grid.size() < 3 || !std::is_sorted(dual_grid.begin(), dual_grid.end()))
        throw std::invalid_argument("dual grid must be sorted with at least 3 points");
    if (f.shape() == Shape::concave) {
        // min_x(xy - f(x)) = -max_x(xy' - (-f)(x)) at y' = -y, i.e. mirror twice.
        GridFunction g = negated(f);
        require_proper_convex_values(g);
        std::vector<double> vals(dual_grid.size());
        for (std::size_t j = 0; j < dual_grid.size(); ++j) {
            // min_x(xy - f(x)) = -(-f)*(-y)
            double c = convex_conjugate_at(g, -dual_grid[j]);
            vals[j] = (c == 0.0) ? 0.0 : -c;
        }
        return GridFunction(dual_grid, std::move(vals), Shape::concave);
    }
    require_proper_convex_values(f);
    std::vector<double> vals(dual_grid.size());
    for (std::size_t j = 0; j < dual_grid.size(); ++j)
        vals[j] = convex_conjugate_at(f, dual_grid[j]);
    return GridFunction(dual_grid, std::move(vals), Shape::convex);
}

double biconjugate_check(const GridFunction& f) {
    if (f.shape() == Shape::concave) return biconjugate_check(negated(f));
    require_proper_convex_values(f);

    // Dual grid: every adjacent finite slope, plus midpoints for padding.
    std::vector<double> slopes;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        if (!is_finite(f.values()[i]) || !is_finite(f.values()[i + 1])) continue;
        slopes.push_back((f.values()[i + 1] - f.values()[i]) /
                         (f.grid()[i + 1] - f.grid()[i]));
    }
    if (slopes.empty()) slopes = {-1.0, 0.0, 1.0};
    std::sort(slopes.begin(), slopes.end());
    std::vector<double> dual;
    dual.push_back(slopes.front() - 1.0);
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        dual.push_back(slopes[i]);
        if (i + 1 < slopes.size() && slopes[i + 1] > slopes[i] + 1e-14)
            dual.push_back(0.5 * (slopes[i] + slopes[i + 1]));
    }
    dual.push_back(slopes.back() + 1.0);
    dual.erase(std::unique(dual.begin(), dual.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
               dual.end());
    while (dual.size() < 3) dual.push_back(dual.back() + 1.0);

    GridFunction fstar = grid_conjugate(f, dual);
    double dev = 0.0;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        if (!is_finite(f.values()[i])) continue;
        double fxx = convex_conjugate_at(fstar, f.grid()[i]);  // max_y(xy - f*(y))
        dev = std::max(dev, std::fabs(fxx - f.values()[i]));
    }
    return dev;
}

GridFunction inf_convolution(const GridFunction& f, const GridFunction& g) {
    if (f.shape() != Shape::convex || g.shape() != Shape::convex)
        throw std::invalid_argument("infimal convolution expects convex inputs");
    require_proper_convex_values(f);
    require_proper_convex_values(g);
    double hf = f.spacing(), hg = g.spacing();
    if (std::fabs(hf - hg) > 1e-12 * (1.0 + std::fabs(hf)))
        throw std::invalid_argument("grids must share their spacing");

    std::size_t nf = f.size(), ng = g.size();
    std::vector<double> grid(nf + ng - 1), vals(nf + ng - 1, inf);
    for (std::size_t k = 0; k < grid.size(); ++k)
        grid[k] = f.grid().front() + g.grid().front() + static_cast<double>(k) * hf;
    for (std::size_t i = 0; i < nf; ++i) {
        if (!is_finite(f.values()[i])) continue;
        for (std::size_t j = 0; j < ng; ++j) {
            if (!is_finite(g.values()[j])) continue;
            double s = f.values()[i] + g.values()[j];
            if (s < vals[i + j]) vals[i + j] = s;
        }
    }
    bool any_finite = std::any_of(vals.begin(), vals.end(),
                                  [](double v) { return is_finite(v); });
    if (!any_finite) throw EmptyDomain("infimal convolution is identically +inf");
    return GridFunction(std::move(grid), std::move(vals), Shape::convex);
}

GridFunction sup_convolution(const GridFunction& f, const GridFunction& g) {
    if (f.shape() != Shape::concave || g.shape() != Shape::concave)
        throw std::invalid_argument("supremal convolution expects concave inputs");
    return negated(inf_convolution(negated(f), negated(g)));
}

GridFunction lsc_hull(const GridFunction& f) {
    if (f.shape() == Shape::concave) return negated(lsc_hull(negated(f)));

    std::vector<std::size_t> fin;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (is_finite(f.values()[i])) fin.push_back(i);

    // Monotone chain over the finite graph points: keep slopes increasing.
    std::vector<std::size_t> hull;
    auto slope = [&](std::size_t a, std::size_t b) {
        return (f.values()[b] - f.values()[a]) / (f.grid()[b] - f.grid()[a]);
    };
    for (std::size_t idx : fin) {
        while (hull.size() >= 2 &&
               slope(hull[hull.size() - 2], idx) <=
                   slope(hull[hull.size() - 2], hull[hull.size() - 1]))
            hull.pop_back();
        hull.push_back(idx);
    }

    std::vector<double> vals = f.values();
    std::size_t seg = 0;
    for (std::size_t idx : fin) {
        while (seg + 1 < hull.size() && f.grid()[hull[seg + 1]] < f.grid()[idx]) ++seg;
        if (seg + 1 >= hull.size()) {
            vals[idx] = f.values()[hull.back()];
            continue;
        }
        double xa = f.grid()[hull[seg]], xb = f.grid()[hull[seg + 1]];
        double va = f.values()[hull[seg]], vb = f.values()[hull[seg + 1]];
        double t = (f.grid()[idx] - xa) / (xb - xa);
        vals[idx] = va + t * (vb - va);
    }
    return GridFunction(f.grid(), std::move(vals), Shape::convex);
}

}  // namespace duality::grid
