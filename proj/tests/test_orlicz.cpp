#include "doctest.h"

#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "duality/extended.hpp"
#include "duality/orlicz.hpp"
#include "duality/scalar.hpp"

using namespace duality;
using namespace duality::orlicz;

namespace {

// Two-sided exponential ladder starting at level m0: outcomes +/- m with
// probability e^{-m} each, m = m0, m0+1, ... Built here from scratch so the
// series machinery is tested against formulas, not against itself.
SeriesRandomVariable ladder_series(int m0) {
    auto term = [m0](std::size_t j) -> SeriesTerm {
        double m = static_cast<double>(m0) + static_cast<double>(j / 2);
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        return {sign * m, std::exp(-m)};
    };
    auto tail = [m0](std::size_t j, double s) -> std::optional<double> {
        double a = 1.0 - std::fabs(s);
        if (a <= 0.0) return inf;  // sum of e^{-m}(e^{|s|m}-1) diverges
        double mstart = static_cast<double>(m0) + static_cast<double>(j / 2);
        return 2.0 * std::exp(-a * mstart) / (-std::expm1(-a));
    };
    return {term, tail};
}

// Exact modular of the ladder under e^{|x|}-1 at scale s in (0,1): the
// Young function is even, so both signs contribute e^{-m}(e^{sm}-1) and
// the sum telescopes to 2 [G(1-s) - G(1)] with G geometric from m0.
double ladder_modular(int m0, double s) {
    auto geo = [m0](double a) {
        return std::exp(-a * static_cast<double>(m0)) / (-std::expm1(-a));
    };
    return 2.0 * (geo(1.0 - s) - geo(1.0));
}

double ladder_norm_root(int m0) {
    auto h = [m0](double lambda) { return ladder_modular(m0, 1.0 / lambda) - 1.0; };
    return find_root(h, 1.0 + 1e-9, 16.0, 1e-13, 300);
}

FiniteRandomVariable three_point() {
    return {{0.3, -1.2, 2.0}, {0.2, 0.5, 0.3}};
}

}  // namespace

TEST_SUITE("orlicz") {

TEST_CASE("random variable validation") {
    CHECK_NOTHROW(three_point().validate());
    FiniteRandomVariable bad1{{1.0, 2.0}, {0.5}};
    CHECK_THROWS_AS(bad1.validate(), std::invalid_argument);
    FiniteRandomVariable bad2{{1.0, 2.0}, {0.7, -0.1}};
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
    FiniteRandomVariable bad3{{1.0, 2.0}, {0.7, 0.2}};
    CHECK_THROWS_AS(bad3.validate(), std::invalid_argument);
    FiniteRandomVariable empty{{}, {}};
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("Young function construction guards") {
    CHECK_THROWS_AS(YoungFunction::make("off", [](double x) { return x + 1.0; }),
                    std::invalid_argument);  // does not vanish at 0
    CHECK_THROWS_AS(YoungFunction::make("odd", [](double x) { return x; }),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        YoungFunction::make("down", [](double x) { return -std::fabs(x); }),
        std::invalid_argument);
    CHECK_THROWS_AS(YoungFunction::power(0.5), std::invalid_argument);
    auto ok = YoungFunction::make("sq", [](double x) { return x * x; });
    CHECK(ok(3.0) == 9.0);
    CHECK(YoungFunction::exponential().name() == "exp1");
}

TEST_CASE("modular is the plain expectation of Phi(scale X)") {
    auto phi = YoungFunction::exponential();
    auto x = three_point();
    double expected = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        expected += x.probs[i] * std::expm1(std::fabs(0.7 * x.outcomes[i]));
    auto r = modular(phi, x, 0.7);
    CHECK(std::fabs(r.value - expected) < 1e-15);
    CHECK(r.error_bound == 0.0);
}

TEST_CASE("zero-probability states contribute nothing even at huge outcomes") {
    auto phi = YoungFunction::exponential();
    FiniteRandomVariable x{{1.0, 1e308}, {1.0, 0.0}};
    auto r = modular(phi, x, 1.0);
    CHECK(std::fabs(r.value - std::expm1(1.0)) < 1e-15);
    auto n = gauge_norm(phi, x);
    CHECK(std::fabs(n.value - 1.0 / std::log(2.0)) < 1e-9);
}

TEST_CASE("gauge norm under a power function is the moment norm") {
    for (double p : {2.0, 3.0}) {
        auto phi = YoungFunction::power(p);
        auto x = three_point();
        double mom = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            mom += x.probs[i] * std::pow(std::fabs(x.outcomes[i]), p);
        double lp = std::pow(mom, 1.0 / p);
        auto n = gauge_norm(phi, x);
        CHECK(std::fabs(n.value - lp) < 1e-10 * (1.0 + lp));
        CHECK(n.modular_residual < 1e-9);
    }
}

TEST_CASE("gauge norm of a constant under the exponential function") {
    auto phi = YoungFunction::exponential();
    for (double c : {1.0, 2.5}) {
        FiniteRandomVariable x{{c}, {1.0}};
        auto n = gauge_norm(phi, x);
        CHECK(std::fabs(n.value - c / std::log(2.0)) < 1e-9);
    }
    FiniteRandomVariable zero{{0.0, 0.0}, {0.5, 0.5}};
    CHECK(gauge_norm(phi, zero).value == 0.0);
}

TEST_CASE("gauge norm is positively homogeneous and monotone") {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> out(0.0, 2.0);
    std::uniform_real_distribution<double> pr(0.1, 1.0);
    auto phi = YoungFunction::exponential();
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t n = 2 + rep % 5;
        FiniteRandomVariable x;
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x.outcomes.push_back(out(rng));
            x.probs.push_back(pr(rng));
            mass += x.probs.back();
        }
        for (auto& p : x.probs) p /= mass;
        x.probs[0] += 1.0 - std::accumulate(x.probs.begin(), x.probs.end(), 0.0);
        double base = gauge_norm(phi, x).value;
        for (double c : {0.5, -3.0}) {
            FiniteRandomVariable cx = x;
            for (auto& o : cx.outcomes) o *= c;
            double got = gauge_norm(phi, cx).value;
            CHECK(std::fabs(got - std::fabs(c) * base) < 1e-8 * (1.0 + base));
        }
        FiniteRandomVariable bigger = x;
        for (auto& o : bigger.outcomes) o *= 1.5;
        CHECK(gauge_norm(phi, bigger).value >= base - 1e-10);
    }
}

TEST_CASE("series modular matches the geometric closed form") {
    auto phi = YoungFunction::exponential();
    for (int m0 : {2, 7}) {
        for (double s : {0.5, 1.0 / 3.0}) {
            auto r = modular(phi, ladder_series(m0), s);
            CAPTURE(m0);
            CAPTURE(s);
            CHECK(std::fabs(r.value - ladder_modular(m0, s)) < 1e-10);
            CHECK(r.error_bound < 1e-9);
        }
    }
}

TEST_CASE("series modular certifies divergence at scale one") {
    auto phi = YoungFunction::exponential();
    auto r = modular(phi, ladder_series(2), 1.0);
    CHECK(r.value == inf);
    CHECK(r.error_bound == 0.0);
}

TEST_CASE("a series without a usable tail bound is rejected") {
    auto phi = YoungFunction::exponential();
    SeriesRandomVariable blind{
        [](std::size_t j) -> SeriesTerm {
            double m = 2.0 + static_cast<double>(j);
            return {m, std::exp(-m)};
        },
        [](std::size_t, double) -> std::optional<double> { return std::nullopt; }};
    CHECK_THROWS_AS(modular(phi, blind, 0.5), TailBoundUnavailable);
}

TEST_CASE("series gauge norms decrease toward one and match the root") {
    auto phi = YoungFunction::exponential();
    double prev = inf;
    for (int m0 : {2, 5, 10, 20, 40}) {
        auto n = gauge_norm(phi, ladder_series(m0));
        double root = ladder_norm_root(m0);
        CAPTURE(m0);
        CHECK(std::fabs(n.value - root) < 1e-8);
        CHECK(n.value > 1.0);
        CHECK(n.value < prev);
        prev = n.value;
    }
    // far out the norm hugs one: the tail carries mass at every scale above 1
    CHECK(prev < 1.1);
}

TEST_CASE("a variable outside the space has no finite gauge norm") {
    auto phi = YoungFunction::exponential();
    // outcomes j^2 with weights ~ e^{-j}: E e^{s X} = inf for every s > 0
    SeriesRandomVariable outside{
        [](std::size_t j) -> SeriesTerm {
            double m = 1.0 + static_cast<double>(j);
            return {m * m, std::exp(-m)};
        },
        [](std::size_t, double) -> std::optional<double> { return inf; }};
    CHECK_THROWS_AS(gauge_norm(phi, outside), NonFiniteNorm);
}

TEST_CASE("doubling growth verdicts") {
    std::vector<double> grid;
    for (double x = 1.0; x <= 1.1e4; x *= 1.25) grid.push_back(x);

    auto p2 = delta2_check(YoungFunction::power(2.0), 0.5, grid);
    CHECK(p2.satisfied);
    CHECK(std::fabs(p2.growth_constant - 4.0) < 1e-12);

    auto ex = delta2_check(YoungFunction::exponential(), 0.5, grid);
    CHECK_FALSE(ex.satisfied);
    CHECK(ex.witness_ratio > 1e6);
    CHECK(ex.witness_x > 10.0);
    CHECK(ex.witness_x < 25.0);

    auto mild = YoungFunction::make("xxlog", [](double x) {
        return x * x * std::log(std::exp(1.0) + std::fabs(x));
    });
    auto mr = delta2_check(mild, 0.5, grid);
    CHECK(mr.satisfied);
    CHECK(mr.growth_constant < 5.0);
    CHECK(mr.growth_constant >= 4.0);
}

TEST_CASE("doubling check refuses to certify from a short or climbing grid") {
    auto phi = YoungFunction::power(2.0);
    CHECK_THROWS_AS(delta2_check(phi, 0.5, {1.0, 2.0, 4.0}), InconclusiveGrid);

    // e^{sqrt(x)}-1 grows without a doubling bound, but on three decades the
    // ratio is still below the explosion threshold: must refuse, not certify.
    auto slow = YoungFunction::make(
        "expsqrt", [](double x) { return std::expm1(std::sqrt(std::fabs(x))); });
    std::vector<double> grid;
    for (double x = 1.0; x <= 1.1e3; x *= 1.25) grid.push_back(x);
    CHECK_THROWS_AS(delta2_check(slow, 0.5, grid), InconclusiveGrid);
}

TEST_CASE("modular decay with norms pinned away from zero") {
    auto phi = YoungFunction::exponential();
    auto rep = modular_vs_norm(
        phi, [](std::size_t k) { return ladder_series(static_cast<int>(k)); },
        {2, 5, 10, 20, 40}, {0.5, 0.25});
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.modular_to_zero);
    CHECK(rep.norm_not_to_zero);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        CHECK(rep.rows[i].modulars[0] < rep.rows[i - 1].modulars[0]);
        CHECK(rep.rows[i].norm > 1.0);
    }
    // exact tail level: 2 e^{-20} / (1 - e^{-1/2})
    CHECK(rep.rows.back().modulars[0] < 2e-8);
}

TEST_CASE("generalized Cauchy-Schwarz with the doubled norm product") {
    auto x = three_point();
    FiniteRandomVariable y{{0.5, 1.5, -0.7}, x.probs};
    double lhs = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        lhs += x.probs[i] * std::fabs(x.outcomes[i] * y.outcomes[i]);
    auto r1 = holder_check(x, y, YoungFunction::power(2.0), YoungFunction::power(2.0));
    CHECK(std::fabs(r1.lhs - lhs) < 1e-14);
    CHECK(r1.holds);
    CHECK(r1.rhs >= r1.lhs);
    auto r2 = holder_check(x, y, YoungFunction::power(3.0), YoungFunction::power(1.5));
    CHECK(r2.holds);
    FiniteRandomVariable mismatched{{0.5, 1.5}, {0.5, 0.5}};
    CHECK_THROWS_AS(
        holder_check(x, mismatched, YoungFunction::power(2.0), YoungFunction::power(2.0)),
        std::invalid_argument);
}

TEST_CASE("finite-support variables live in the heart of the space") {
    auto m = membership(three_point());
    CHECK(m.in_space);
    CHECK(m.in_heart);
    CHECK_FALSE(m.reason.empty());
}

}  // TEST_SUITE
