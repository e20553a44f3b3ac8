#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "duality/extended.hpp"
#include "duality/lp.hpp"
#include "duality/quadrature.hpp"
#include "duality/scalar.hpp"

using namespace duality;

TEST_SUITE("numerics") {

TEST_CASE("quadrature reproduces closed-form integrals") {
    auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(std::fabs(r.value - 1.0 / 3.0) < 1e-13);
    CHECK(r.error < 1e-10);

    auto s = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
    CHECK(std::fabs(s.value - 2.0) < 1e-12);

    auto e = integrate([](double x) { return std::exp(-x); }, 0.0, 40.0);
    CHECK(std::fabs(e.value - (1.0 - std::exp(-40.0))) < 1e-11);
}

TEST_CASE("a single panel integrates low-degree polynomials exactly") {
    auto r = integrate(
        [](double x) { return std::pow(x, 7) - 3.0 * std::pow(x, 3) + 1.0; }, 0.0,
        1.0, 1e-12, 1e-12, 1);
    CHECK(std::fabs(r.value - (1.0 / 8.0 - 3.0 / 4.0 + 1.0)) < 1e-14);
    CHECK(r.evaluations >= 15);
}

TEST_CASE("seeded mesh resolves an inverse square root head") {
    const double a = 1e-10;
    auto mesh = geometric_mesh(a, 1.0);
    REQUIRE(mesh.size() >= 3);
    CHECK(mesh.front() == a);
    CHECK(mesh.back() == 1.0);
    auto r = integrate_seeded([](double x) { return 1.0 / std::sqrt(x); }, mesh,
                              1e-10, 1e-10);
    CHECK(std::fabs(r.value - 2.0 * (1.0 - std::sqrt(a))) < 1e-8);
}

TEST_CASE("exhausted subdivision budget raises instead of lying") {
    CHECK_THROWS_AS(integrate([](double x) { return std::sin(50.0 * x); }, 0.0,
                              10.0, 1e-14, 1e-14, 1),
                    QuadratureFailure);
}

TEST_CASE("golden section locates a smooth minimum") {
    auto m = golden_section_min(
        [](double x) { return (x - 1.3) * (x - 1.3) + 2.0; }, -4.0, 5.0);
    CHECK(std::fabs(m.x - 1.3) < 1e-7);
    CHECK(std::fabs(m.fx - 2.0) < 1e-12);
}

TEST_CASE("golden section treats +inf as a hard wall") {
    auto f = [](double x) { return x < 0.0 ? inf : (x - 0.5) * (x - 0.5); };
    auto m = golden_section_min(f, -1.0, 2.0);
    CHECK(std::fabs(m.x - 0.5) < 1e-6);
}

TEST_CASE("newton polish sharpens a critical point") {
    auto fp = [](double x) { return 2.0 * (x - 1.3); };
    double x = newton_polish(fp, 1.35, 0.0, 2.0);
    CHECK(std::fabs(x - 1.3) < 1e-10);
}

TEST_CASE("newton polish refuses to leave the bracket") {
    // derivative pushes hard to the right; the polish must stay put or clamp
    auto fp = [](double) { return -1.0; };
    double x = newton_polish(fp, 0.5, 0.0, 1.0);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
}

TEST_CASE("find_root solves cos x = 0 and demands a sign change") {
    double r = find_root([](double x) { return std::cos(x); }, 1.0, 2.0);
    CHECK(std::fabs(r - std::numbers::pi / 2.0) < 1e-12);
    CHECK_THROWS_AS(find_root([](double x) { return 1.0 + x * x; }, -1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("bracket expansion stops as soon as the predicate holds") {
    double b = 1.0;
    CHECK(expand_upper([](double x) { return x >= 37.0; }, b, 1e6));
    CHECK(b >= 37.0);
    CHECK(b <= 64.0);  // 1 -> 4 -> 16 -> 64
    double c = 1.0;
    CHECK_FALSE(expand_upper([](double) { return false; }, c, 64.0));
    CHECK(c == 64.0);
}

TEST_CASE("simplex solves a separable box problem") {
    auto r = solve_lp({1.0, 1.0}, {{1.0, 0.0}, {0.0, 1.0}}, {2.0, 3.0}, {}, {});
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(std::fabs(r.value - 5.0) < 1e-12);
    CHECK(std::fabs(r.x[0] - 2.0) < 1e-12);
    CHECK(std::fabs(r.x[1] - 3.0) < 1e-12);
}

TEST_CASE("simplex handles equality constraints") {
    auto r = solve_lp({1.0, 2.0}, {}, {}, {{1.0, 1.0}}, {1.0});
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(std::fabs(r.value - 2.0) < 1e-12);
    CHECK(std::fabs(r.x[1] - 1.0) < 1e-12);
}

TEST_CASE("unbounded problems come with a certified improving ray") {
    auto r = solve_lp({1.0}, {{-1.0}}, {1.0}, {}, {});
    REQUIRE(r.status == LpStatus::unbounded);
    REQUIRE(r.ray.size() == 1);
    CHECK(r.ray[0] > 0.0);  // c'ray > 0 and -ray <= 0: feasible forever
}

TEST_CASE("infeasible problems are reported as such") {
    auto r = solve_lp({1.0}, {{1.0}}, {-1.0}, {}, {});
    CHECK(r.status == LpStatus::infeasible);
}

TEST_CASE("duplicate constraints do not cycle the pivot rule") {
    auto r = solve_lp({1.0, 1.0}, {{1.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}},
                      {1.0, 1.0, 1.0}, {}, {});
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(std::fabs(r.value - 1.0) < 1e-12);
}

TEST_CASE("problem builder sign-splits free variables") {
    LpProblem p;
    int y = p.add_var(false);
    p.add_ge({{y, 1.0}}, -3.0);
    auto r = p.maximize({{y, -1.0}});
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(std::fabs(r.value - 3.0) < 1e-12);
    CHECK(std::fabs(r.x[static_cast<std::size_t>(y)] + 3.0) < 1e-12);
}

TEST_CASE("problem builder mixes variable kinds") {
    LpProblem p;
    int s = p.add_var(true);   // s >= 0
    int t = p.add_var(false);  // free
    p.add_le({{s, 1.0}, {t, 1.0}}, 4.0);
    p.add_eq({{t, 1.0}}, -2.0);
    auto r = p.maximize({{s, 1.0}, {t, 1.0}});
    REQUIRE(r.status == LpStatus::optimal);
    // t = -2 forced, s <= 6: optimum 4
    CHECK(std::fabs(r.value - 4.0) < 1e-11);
    CHECK(std::fabs(r.x[static_cast<std::size_t>(t)] + 2.0) < 1e-11);
}

TEST_CASE("extended reals add and scale without producing NaN") {
    CHECK(ext_add(inf, 5.0) == inf);
    CHECK(ext_add(-inf, 5.0) == -inf);
    CHECK_THROWS_AS(ext_add(inf, -inf), undefined_arithmetic);
    CHECK(ext_mul_prob(0.0, inf) == 0.0);
    CHECK(ext_mul_prob(0.5, 4.0) == 2.0);
    CHECK(ext_mul_prob(0.25, -inf) == -inf);
    CHECK_THROWS_AS(require_not_nan(std::nan("")), undefined_arithmetic);
}

}  // TEST_SUITE
