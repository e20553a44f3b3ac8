#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "duality/convex_grid.hpp"
#include "duality/extended.hpp"

using namespace duality;
using namespace duality::grid;

namespace {

std::vector<double> uniform(double a, double b, std::size_t n) {
    std::vector<double> g(n);
    double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = a + h * static_cast<double>(i);
    return g;
}

GridFunction sample(const std::vector<double>& g,
                    const std::function<double(double)>& f, Shape s) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g[i]);
    return GridFunction(g, std::move(v), s);
}

}  // namespace

TEST_SUITE("convex_grid") {

TEST_CASE("constructor rejects malformed samples") {
    CHECK_THROWS_AS(GridFunction({0.0, 1.0}, {0.0, 1.0}, Shape::convex),
                    std::invalid_argument);
    CHECK_THROWS_AS(GridFunction({0.0, 1.0, 0.5}, {0.0, 1.0, 2.0}, Shape::convex),
                    std::invalid_argument);
    CHECK_THROWS_AS(GridFunction({0.0, 1.0, 2.0}, {0.0, 1.0}, Shape::convex),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        GridFunction({0.0, 1.0, 2.0}, {0.0, std::nan(""), 2.0}, Shape::convex),
        std::invalid_argument);
    CHECK_THROWS_AS(GridFunction({0.0, 1.0, 2.0, 3.0}, {inf, inf, 2.0, 3.0},
                                 Shape::convex),
                    std::invalid_argument);  // fewer than 3 finite values
}

TEST_CASE("shape consistency flags a sine but accepts a parabola") {
    auto g = uniform(-3.0, 3.0, 61);
    CHECK(sample(g, [](double x) { return 0.5 * x * x; }, Shape::convex)
              .shape_consistent());
    CHECK_FALSE(sample(g, [](double x) { return std::sin(x); }, Shape::convex)
                    .shape_consistent());
    CHECK(sample(g, [](double x) { return -0.5 * x * x; }, Shape::concave)
              .shape_consistent());
}

TEST_CASE("spacing demands a uniform grid") {
    auto f = GridFunction({0.0, 1.0, 2.0, 4.0}, {0.0, 1.0, 2.0, 4.0}, Shape::convex);
    CHECK_THROWS_AS(f.spacing(), std::invalid_argument);
    auto g = sample(uniform(0.0, 1.0, 11), [](double x) { return x; }, Shape::convex);
    CHECK(std::fabs(g.spacing() - 0.1) < 1e-14);
}

TEST_CASE("transform of a parabola is the dual parabola") {
    auto f = sample(uniform(-3.0, 3.0, 601), [](double x) { return 0.5 * x * x; },
                    Shape::convex);
    auto fs = grid_conjugate(f, uniform(-2.0, 2.0, 401));
    for (std::size_t j = 0; j < fs.size(); ++j) {
        double y = fs.grid()[j];
        CHECK(std::fabs(fs.values()[j] - 0.5 * y * y) < 2e-5);
    }
    CHECK(fs.shape() == Shape::convex);
    CHECK(fs.shape_consistent());
}

TEST_CASE("transform of an affine function spikes at its slope") {
    auto f = sample(uniform(-2.0, 2.0, 41), [](double x) { return 2.0 * x + 1.0; },
                    Shape::convex);
    auto fs = grid_conjugate(f, {-1.0, 0.0, 1.0, 2.0, 3.0});
    // at y = 2 the maximand is constant: conjugate = -intercept exactly
    CHECK(fs.values()[3] == -1.0);
    // away from the slope it grows with the grid radius
    CHECK(fs.values()[0] == doctest::Approx(-1.0 + 3.0 * 2.0));
    CHECK(fs.values()[4] == doctest::Approx(-1.0 + 2.0));
}

TEST_CASE("domain walls turn into linear growth in the dual") {
    // x^2/2 restricted to [-1, 1]; beyond the wall the dual is |y| - 1/2
    auto g = uniform(-2.0, 2.0, 81);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        v[i] = std::fabs(g[i]) <= 1.0 + 1e-12 ? 0.5 * g[i] * g[i] : inf;
    auto f = GridFunction(g, std::move(v), Shape::convex);
    auto fs = grid_conjugate(f, {-3.0, 0.0, 2.0, 3.0});
    CHECK(std::fabs(fs.values()[2] - 1.5) < 1e-12);
    CHECK(std::fabs(fs.values()[3] - 2.5) < 1e-12);
    CHECK(std::fabs(fs.values()[0] - 2.5) < 1e-12);
}

TEST_CASE("transform is order reversing") {
    auto g = uniform(-2.0, 2.0, 81);
    auto f = sample(g, [](double x) { return 0.5 * x * x; }, Shape::convex);
    auto h = sample(g, [](double x) { return 0.5 * x * x + 0.3; }, Shape::convex);
    auto dual = uniform(-1.5, 1.5, 31);
    auto fs = grid_conjugate(f, dual);
    auto hs = grid_conjugate(h, dual);
    for (std::size_t j = 0; j < dual.size(); ++j)
        CHECK(fs.values()[j] >= hs.values()[j] + 0.3 - 1e-12);
}

TEST_CASE("concave samples use the mirrored transform") {
    auto f = sample(uniform(-3.0, 3.0, 601), [](double x) { return -0.5 * x * x; },
                    Shape::concave);
    auto fs = grid_conjugate(f, uniform(-2.0, 2.0, 81));
    REQUIRE(fs.shape() == Shape::concave);
    // min_x(xy + x^2/2) = -y^2/2
    for (std::size_t j = 0; j < fs.size(); ++j) {
        double y = fs.grid()[j];
        CHECK(std::fabs(fs.values()[j] + 0.5 * y * y) < 2e-5);
    }
}

TEST_CASE("double transform recovers convex samples and exposes nonconvex ones") {
    auto g = uniform(-2.0, 2.0, 81);
    auto f = sample(g, [](double x) { return 0.5 * x * x; }, Shape::convex);
    CHECK(biconjugate_check(f) < 1e-9);

    auto w = sample(g, [](double x) { return (x * x - 1.0) * (x * x - 1.0); },
                    Shape::convex);
    double dev = biconjugate_check(w);
    CHECK(dev > 0.9);
    CHECK(dev < 1.1);

    auto c = sample(g, [](double x) { return -0.5 * x * x; }, Shape::concave);
    CHECK(biconjugate_check(c) < 1e-9);
}

TEST_CASE("improper input is rejected by the transform") {
    GridFunction f({0.0, 1.0, 2.0, 3.0}, {-inf, 0.0, 0.1, 0.4}, Shape::convex);
    CHECK_THROWS_AS(grid_conjugate(f, {-1.0, 0.0, 1.0}), ImproperFunction);
    CHECK_THROWS_AS(biconjugate_check(f), ImproperFunction);
}

TEST_CASE("parallel sum of two parabolas") {
    auto g = uniform(-2.0, 2.0, 81);
    auto f = sample(g, [](double x) { return 0.5 * x * x; }, Shape::convex);
    auto conv = inf_convolution(f, f);
    CHECK(std::fabs(conv.grid().front() + 4.0) < 1e-12);
    CHECK(std::fabs(conv.grid().back() - 4.0) < 1e-12);
    for (std::size_t k = 0; k < conv.size(); ++k) {
        double x = conv.grid()[k];
        if (std::fabs(x) > 2.0) continue;  // outer region leans on the walls
        CHECK(conv.values()[k] >= 0.25 * x * x - 1e-13);
        CHECK(conv.values()[k] <= 0.25 * x * x + 1e-3);
    }
    CHECK(conv.shape_consistent(1e-9));
}

TEST_CASE("parallel sum turns into addition under the transform") {
    auto g = uniform(-2.0, 2.0, 81);
    auto f = sample(g, [](double x) { return 0.5 * x * x; }, Shape::convex);
    auto h = sample(g, [](double x) { return x * x + 0.25 * x; }, Shape::convex);
    auto conv = inf_convolution(f, h);
    std::vector<double> dual{-2.0, -1.5, -1.0, -0.4, 0.0, 0.3, 1.0, 1.7, 2.0};
    auto lhs = grid_conjugate(conv, dual);
    auto fs = grid_conjugate(f, dual);
    auto hs = grid_conjugate(h, dual);
    for (std::size_t j = 0; j < dual.size(); ++j)
        CHECK(std::fabs(lhs.values()[j] - (fs.values()[j] + hs.values()[j])) < 1e-9);
}

TEST_CASE("mismatched spacings are rejected") {
    auto f = sample(uniform(-1.0, 1.0, 21), [](double x) { return x * x; },
                    Shape::convex);
    auto h = sample(uniform(-1.0, 1.0, 41), [](double x) { return x * x; },
                    Shape::convex);
    CHECK_THROWS_AS(inf_convolution(f, h), std::invalid_argument);
}

TEST_CASE("concave mirror of the parallel sum") {
    auto g = uniform(-2.0, 2.0, 81);
    auto f = sample(g, [](double x) { return -0.5 * x * x; }, Shape::concave);
    auto conv = sup_convolution(f, f);
    CHECK(conv.shape() == Shape::concave);
    for (std::size_t k = 0; k < conv.size(); ++k) {
        double x = conv.grid()[k];
        if (std::fabs(x) > 2.0) continue;
        CHECK(conv.values()[k] <= -0.25 * x * x + 1e-13);
        CHECK(conv.values()[k] >= -0.25 * x * x - 1e-3);
    }
    CHECK_THROWS_AS(
        sup_convolution(sample(g, [](double x) { return x * x; }, Shape::convex),
                        sample(g, [](double x) { return x * x; }, Shape::convex)),
        std::invalid_argument);
}

TEST_CASE("lower envelope fixes convex samples and bridges wells") {
    auto g = uniform(-2.0, 2.0, 81);
    auto f = sample(g, [](double x) { return 0.5 * x * x; }, Shape::convex);
    auto hf = lsc_hull(f);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(std::fabs(hf.values()[i] - f.values()[i]) < 1e-13);

    auto w = sample(g, [](double x) { return (x * x - 1.0) * (x * x - 1.0); },
                    Shape::convex);
    auto hw = lsc_hull(w);
    CHECK(hw.shape_consistent(1e-12));
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(hw.values()[i] <= w.values()[i] + 1e-13);
    // chord between the two minima at +-1 pins the middle to zero
    CHECK(std::fabs(hw.values()[40]) < 1e-13);

    auto hh = lsc_hull(hw);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(std::fabs(hh.values()[i] - hw.values()[i]) < 1e-14);
}

TEST_CASE("lower envelope keeps domain walls in place") {
    auto g = uniform(-2.0, 2.0, 41);
    std::vector<double> v(g.size(), inf);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i] >= -1.0 - 1e-12)
            v[i] = (g[i] * g[i] - 1.0) * (g[i] * g[i] - 1.0);
    auto f = GridFunction(g, std::move(v), Shape::convex);
    auto h = lsc_hull(f);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] < -1.0 - 1e-12)
            CHECK(h.values()[i] == inf);
        else
            CHECK(h.values()[i] <= f.values()[i] + 1e-13);
    }
}

TEST_CASE("concave samples get the upper envelope") {
    auto g = uniform(-2.0, 2.0, 81);
    auto w = sample(g, [](double x) { return -(x * x - 1.0) * (x * x - 1.0); },
                    Shape::concave);
    auto hw = lsc_hull(w);
    CHECK(hw.shape() == Shape::concave);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(hw.values()[i] >= w.values()[i] - 1e-13);
    CHECK(std::fabs(hw.values()[40]) < 1e-13);
}

TEST_CASE("random convex samples pass the round trip at grid accuracy") {
    std::mt19937_64 rng(20240901);
    std::uniform_real_distribution<double> coef(0.2, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        double a = coef(rng), b = coef(rng) - 1.1, c = coef(rng);
        double h = rep % 2 == 0 ? 0.1 : 0.05;
        auto g = uniform(-2.0, 2.0, static_cast<std::size_t>(4.0 / h) + 1);
        auto f = sample(g, [&](double x) { return a * x * x + b * x + c; },
                        Shape::convex);
        CHECK(biconjugate_check(f) < h);
    }
}

}  // TEST_SUITE
