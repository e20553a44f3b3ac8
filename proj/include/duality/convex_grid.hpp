#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "duality/extended.hpp"

/// Grid-based convex analysis: brute-force conjugates, biconjugate checks,
/// infimal/supremal convolution and lower-semicontinuous hulls on 1-D grids.
/// Deliberately simple and exhaustive; the rest of the library uses these as
/// independent oracles.

namespace duality::grid {

struct ImproperFunction : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Shape { convex, concave };

/// Extended-real function sampled on a strictly increasing grid. Convex
/// functions may take +inf (off-domain), concave ones -inf; the constructor
/// checks grid monotonicity and that at least 3 values are finite, while the
/// shape itself is checked separately (hull-type operations accept inputs
/// that violate it).
class GridFunction {
  public:
    GridFunction(std::vector<double> grid, std::vector<double> values, Shape shape);

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    Shape shape() const { return shape_; }
    std::size_t size() const { return grid_.size(); }

    /// Second-difference (divided-difference monotonicity) sign check over
    /// consecutive finite triples.
    bool shape_consistent(double tol = 1e-9) const;

    /// Uniform spacing; throws std::invalid_argument if the grid is not
    /// uniform to 1e-12 relative.
    double spacing() const;

  private:
    std::vector<double> grid_;
    std::vector<double> values_;
    Shape shape_;
};

/// Brute-force conjugate on dual_grid: max_x(xy - f(x)) for convex f,
/// min_x(xy - f(x)) for concave f, skipping the off-domain infinity of the
/// matching convention. Throws ImproperFunction when f has no finite value or
/// takes the improper infinity (-inf for convex, +inf for concave).
GridFunction grid_conjugate(const GridFunction& f, const std::vector<double>& dual_grid);

/// Conjugates twice through a dual grid built from every adjacent finite
/// slope of f and returns max |f** - f| over interior grid points with finite
/// f. Zero (to rounding) for closed convex/concave inputs; the hull gap for
/// shape-violating inputs.
double biconjugate_check(const GridFunction& f);

/// Min-plus convolution (f box g)(x) = min_z {f(x - z) + g(z)} for proper
/// convex f, g on uniform grids with equal spacing; the result lives on the
/// Minkowski-sum grid. Throws EmptyDomain when the result is identically
/// +inf.
GridFunction inf_convolution(const GridFunction& f, const GridFunction& g);

/// Concave mirror of inf_convolution (max-plus).
GridFunction sup_convolution(const GridFunction& f, const GridFunction& g);

/// Lower convex envelope (convex shape) or upper concave envelope (concave
/// shape) of the finite graph points, by monotone chain; values at grid
/// points are the envelope's, infinities are preserved. Idempotent.
GridFunction lsc_hull(const GridFunction& f);

}  // namespace duality::grid
