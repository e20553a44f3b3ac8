#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

/// Adaptive Gauss-Kronrod (G7/K15) quadrature on finite intervals, with
/// optional interval seeding so integrable endpoint singularities and widely
/// varying scales are subdivided from the start.

namespace duality {

struct QuadratureFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadResult {
    double value;
    double error;  ///< certified absolute error estimate
    int evaluations;
};

/// Integrates f over [a, b] to absolute tolerance abs_tol or relative
/// tolerance rel_tol, whichever is met first. Throws QuadratureFailure if the
/// subdivision budget is exhausted before either holds.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-12, double rel_tol = 1e-12,
                     int max_intervals = 4000);

/// Same, but the adaptive queue starts from the intervals delimited by
/// `breakpoints` (must be increasing; first/last are the integration limits).
QuadResult integrate_seeded(const std::function<double(double)>& f,
                            const std::vector<double>& breakpoints,
                            double abs_tol = 1e-12, double rel_tol = 1e-12,
                            int max_intervals = 4000);

/// Breakpoints a, a*step, ..., capped at b (geometric mesh for integrands that
/// vary on a log scale, e.g. x^{-1/2} heads or slow exponential tails).
std::vector<double> geometric_mesh(double a, double b, double step = 10.0);

}  // namespace duality
