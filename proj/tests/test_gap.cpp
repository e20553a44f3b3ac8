#include "doctest.h"

#include <cmath>
#include <vector>

#include "duality/gap.hpp"
#include "duality/orlicz.hpp"

using namespace duality;
using gap::GapMarket;
using gap::ShockTerm;

namespace {

// E[e^{-lam X}] from the three-atom display: only the states -1, +1 carry X.
double moment_oracle(double lam) {
    double p1 = std::exp(-1.0), pm1 = std::exp(-5.0);
    return p1 * std::exp(-lam) + pm1 * std::exp(lam) + (1.0 - p1 - pm1);
}

// sum_{m=2}^{n} r^m in closed form.
double geom_from_two(double r, int n) {
    return (std::pow(r, 2) - std::pow(r, n + 1)) / (1.0 - r);
}

}  // namespace

TEST_SUITE("gap") {

TEST_CASE("market construction and state weights") {
    GapMarket m(40);
    CHECK(m.truncation() == 40);
    REQUIRE(m.states().size() == 81);
    CHECK(m.states().front() == -40);
    CHECK(m.states().back() == 40);

    double mass = 0.0;
    for (double p : m.probs()) mass += p;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(m.probs()[m.index_of(-1)] == std::exp(-5.0));
    CHECK(m.probs()[m.index_of(2)] == std::exp(-2.0));
    CHECK(m.probs()[m.index_of(-7)] == std::exp(-7.0));
    // Residual mass parked on state 0 keeps the display constants exact:
    // 1 - sum_{m=1}^{40} e^{-m} - e^{-5} - sum_{m=2}^{40} e^{-m}.
    double ladders = geom_from_two(std::exp(-1.0), 40);
    double p0 = 1.0 - (ladders + std::exp(-1.0)) - std::exp(-5.0) - ladders;
    CHECK(m.probs()[m.index_of(0)] == doctest::Approx(p0).epsilon(1e-13));
    CHECK(m.probs()[m.index_of(0)] > 0.19);

    CHECK_THROWS_AS(GapMarket(1), std::invalid_argument);
    CHECK_THROWS_AS((void)m.index_of(41), gap::IndexOutOfTruncation);
    CHECK_THROWS_AS((void)m.index_of(-41), gap::IndexOutOfTruncation);
}

TEST_CASE("claim and shock layout") {
    GapMarket m(6);
    auto x = m.x_claim();
    CHECK(x[m.index_of(1)] == 1.0);
    CHECK(x[m.index_of(-1)] == -1.0);
    CHECK(x[m.index_of(0)] == 0.0);
    CHECK(x[m.index_of(4)] == 0.0);

    auto y3 = m.y_shock(3);
    CHECK(y3[m.index_of(2)] == 0.0);
    CHECK(y3[m.index_of(3)] == 3.0);
    CHECK(y3[m.index_of(-5)] == -5.0);
    CHECK(y3[m.index_of(1)] == 0.0);

    // Indices below 2 clamp to the base shock.
    CHECK(m.y_shock(0) == m.y_shock(2));
    CHECK_THROWS_AS((void)m.y_shock(7), gap::IndexOutOfTruncation);

    auto x3 = m.x_k(3);
    CHECK(x3[m.index_of(1)] == 1.0);
    CHECK(x3[m.index_of(-1)] == -1.0);
    CHECK(x3[m.index_of(3)] == 3.0);
    CHECK(x3[m.index_of(2)] == 0.0);

    std::vector<double> short_claim(3, 0.0);
    CHECK_THROWS_AS((void)m.expectation(short_claim), std::invalid_argument);
}

TEST_CASE("exponential moment and its minimizer") {
    GapMarket m(40);
    for (double lam : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        CHECK(gap::exponential_moment(m, lam) ==
              doctest::Approx(moment_oracle(lam)).epsilon(1e-14));
    }
    CHECK(gap::exponential_moment(m, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    // First-order condition e^{-5} e^lam = e^{-1} e^{-lam} gives lam = 2.
    CHECK(gap::exponential_moment_argmin(m) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_THROWS(gap::exponential_moment(m, std::nan("")));
}

TEST_CASE("completions of the two candidate densities") {
    GapMarket m(40);
    auto c = gap::completions(m);

    CHECK(c.corner_value ==
          doctest::Approx(std::exp(-2.0) - std::exp(-4.0)).epsilon(1e-14));
    CHECK(c.entropy_full ==
          doctest::Approx(-std::log(moment_oracle(2.0))).epsilon(1e-13));
    CHECK(c.identity_residual < 1e-12);
    // Symmetric pairing makes every shock expectation vanish without rounding.
    CHECK(c.separating_residual <= 1e-15);

    // Both densities integrate to one under the market measure.
    CHECK(m.expectation(c.effective) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m.expectation(c.full) == doctest::Approx(1.0).epsilon(1e-13));
    // And they are positive everywhere.
    for (double d : c.effective) CHECK(d > 0.0);
    for (double d : c.full) CHECK(d > 0.0);
}

TEST_CASE("mechanics of a sub-unit aggregate coefficient") {
    const int n = 40;
    GapMarket m(n);
    auto rep = gap::gap_mechanics(m, {{2, 0.5}});

    CHECK(rep.xi_total == 0.5);
    REQUIRE(rep.xi_by_level.size() == static_cast<std::size_t>(n - 1));
    CHECK(rep.xi_by_level.front() == 0.5);
    CHECK(rep.xi_by_level.back() == 0.5);
    CHECK(rep.max_conditional_residual == 0.0);

    // Closed-form E[e^{-Z}], Z = X_2 / 2: two exponentials plus the
    // symmetric geometric ladders.
    double s1 = geom_from_two(std::exp(-1.0), n) + std::exp(-1.0);
    double p0 = 1.0 - s1 - std::exp(-5.0) - geom_from_two(std::exp(-1.0), n);
    double expect = std::exp(-1.5) + std::exp(-4.5) + p0 +
                    geom_from_two(std::exp(-1.5), n) + geom_from_two(std::exp(-0.5), n);
    CHECK(rep.e_exp_z == doctest::Approx(expect).epsilon(1e-13));

    CHECK(rep.jensen_mid == doctest::Approx(moment_oracle(0.5)).epsilon(1e-14));
    CHECK(rep.jensen_rhs == doctest::Approx(moment_oracle(1.0)).epsilon(1e-14));
    CHECK(rep.e_exp_z >= rep.jensen_mid - 1e-12);
    CHECK(rep.jensen_mid >= rep.jensen_rhs - 1e-12);
    CHECK(rep.jensen_chain_holds);

    REQUIRE(rep.growth.size() == 3);
    CHECK(rep.growth[0].first == 10);
    CHECK(rep.growth[1].first == 20);
    CHECK(rep.growth[2].first == 40);
    CHECK(rep.growth[0].second < rep.growth[1].second);
    CHECK(rep.growth[1].second < rep.growth[2].second);
    CHECK(rep.stabilizes);
}

TEST_CASE("mechanics at the divergence boundary xi = 1") {
    GapMarket m(40);
    auto rep = gap::gap_mechanics(m, {{2, 1.0}});
    CHECK(rep.xi_total == 1.0);
    // Negative ladder states contribute e^{-m} e^{+m} = 1 apiece, so the
    // moment grows roughly linearly with the truncation.
    REQUIRE(rep.growth.size() == 3);
    CHECK(rep.growth[0].second > 5.0);
    CHECK(rep.growth[2].second - rep.growth[1].second > 10.0);
    CHECK_FALSE(rep.stabilizes);
    // With a single shock the middle Jensen term coincides with the target.
    CHECK(rep.jensen_mid == rep.jensen_rhs);
    CHECK(rep.jensen_chain_holds);
}

TEST_CASE("mechanics with two staggered shocks") {
    const int n = 12;
    GapMarket m(n);
    auto rep = gap::gap_mechanics(m, {{2, 0.3}, {5, 0.4}});
    CHECK(rep.xi_total == doctest::Approx(0.7).epsilon(1e-15));
    REQUIRE(rep.xi_by_level.size() == 11);
    CHECK(rep.xi_by_level[0] == doctest::Approx(0.3));   // level 2
    CHECK(rep.xi_by_level[2] == doctest::Approx(0.3));   // level 4
    CHECK(rep.xi_by_level[3] == doctest::Approx(0.7));   // level 5
    CHECK(rep.xi_by_level.back() == doctest::Approx(0.7));

    // Independent per-state reconstruction of E[e^{-Z}].
    double tot = 0.0;
    for (std::size_t i = 0; i < m.states().size(); ++i) {
        int s = m.states()[i];
        int a = std::abs(s);
        double z = 0.0;
        if (a == 1)
            z = (s > 0) ? 0.7 : -0.7;
        else if (a >= 5)
            z = 0.7 * s;
        else if (a >= 2)
            z = 0.3 * s;
        tot += m.probs()[i] * std::exp(-z);
    }
    CHECK(rep.e_exp_z == doctest::Approx(tot).epsilon(1e-14));
}

TEST_CASE("mechanics input validation") {
    GapMarket m(12);
    CHECK_THROWS_AS((void)gap::gap_mechanics(m, {{5, 0.1}, {3, 0.1}}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)gap::gap_mechanics(m, {{2, 0.1}, {2, 0.1}}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)gap::gap_mechanics(m, {{15, 0.1}}),
                    gap::IndexOutOfTruncation);
    CHECK_THROWS((void)gap::gap_mechanics(m, {{2, std::nan("")}}));

    // Growth ladder only uses truncations that admit the largest index.
    auto rep = gap::gap_mechanics(GapMarket(40), {{2, 0.2}, {15, 0.2}});
    REQUIRE(rep.growth.size() == 2);
    CHECK(rep.growth[0].first == 20);
    CHECK(rep.growth[1].first == 40);
}

TEST_CASE("duality gap certificate") {
    GapMarket m(40);
    auto c = gap::gap_certificate(m);

    CHECK(c.u_over_c == doctest::Approx(-moment_oracle(1.0)).epsilon(1e-14));
    CHECK(c.u_over_bipolar == doctest::Approx(-moment_oracle(2.0)).epsilon(1e-14));
    CHECK(c.strict_gap);
    // margin = E[e^{-X}] - E[e^{-2X}] = (e^{-1} - e^{-2})^2.
    double margin = std::pow(std::exp(-1.0) - std::exp(-2.0), 2);
    CHECK(c.margin == doctest::Approx(margin).epsilon(1e-12));
    CHECK(c.margin > 0.054);
    CHECK(c.margin < 0.0542);

    CHECK(c.lambda_hat_boxed == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(c.lambda_hat_free == doctest::Approx(2.0).epsilon(1e-10));

    CHECK(c.sampled_strategies == 200);
    CHECK(c.sampled_best <= c.u_over_c + 1e-9);
    CHECK(c.sampled_best > -1.0);

    // Deterministic: the audit uses a fixed seed.
    auto c2 = gap::gap_certificate(m);
    CHECK(c2.sampled_best == c.sampled_best);
    CHECK(c2.lambda_hat_free == c.lambda_hat_free);
}

TEST_CASE("moment variant with exponential order capped at 3/2") {
    const int J = 40;
    const double delta = 1e-3;
    auto r = gap::moment15_variant(60, J, delta);

    // E[X e^{-1.5 X}] = e^{-1}e^{-1.5} - e^{-5}e^{1.5} - delta sum 1/j^2.
    double basel = 0.0;
    for (int j = 1; j <= J; ++j) basel += 1.0 / (static_cast<double>(j) * j);
    double expect = std::exp(-1.0) * std::exp(-1.5) -
                    std::exp(-5.0) * std::exp(1.5) - delta * basel;
    CHECK(r.marginal_at_boundary == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.marginal_at_boundary > 0.0);
    CHECK(r.boundary_binding);
    CHECK(r.lattice_drag == doctest::Approx(-delta * basel).epsilon(1e-12));
    CHECK(r.lattice_drag < 0.0);

    CHECK(r.lambda_hat > 1.5);
    CHECK(r.lambda_hat < 2.1);

    // Denser lattice pushes the minimizer toward the moment wall at 1.5.
    auto dense = gap::moment15_variant(60, 120, delta);
    CHECK(dense.lambda_hat < r.lambda_hat);
    CHECK(dense.lambda_hat - 1.5 < r.lambda_hat - 1.5);

    CHECK_THROWS_AS((void)gap::moment15_variant(60, 0, delta), std::invalid_argument);
    CHECK_THROWS_AS((void)gap::moment15_variant(60, 40, -1.0), std::invalid_argument);
    // Lattice mass may not exceed the free state-0 mass.
    CHECK_THROWS_AS((void)gap::moment15_variant(60, 40, 3.0), std::invalid_argument);
}

TEST_CASE("countable shock as a series variable") {
    auto y = gap::y_shock_series(2);
    auto t0 = y.term(0);
    CHECK(t0.outcome == 2.0);
    CHECK(t0.prob == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    auto t1 = y.term(1);
    CHECK(t1.outcome == -2.0);
    auto t2 = y.term(2);
    CHECK(t2.outcome == 3.0);
    CHECK(t2.prob == doctest::Approx(std::exp(-3.0)).epsilon(1e-15));

    auto y5 = gap::y_shock_series(5);
    CHECK(y5.term(0).outcome == 5.0);

    auto phi = orlicz::YoungFunction::exponential();

    // Divergent beyond |s| = 1: the tail bound certifies it.
    auto div = orlicz::modular(phi, y, 1.0);
    CHECK(std::isinf(div.value));

    // Closed form of the modular: 2 sum_{m>=2} e^{-m}(e^{sm} - 1).
    auto geo = [](double a) { return std::exp(-2.0 * a) / (1.0 - std::exp(-a)); };
    for (double s : {0.25, 0.5, 0.75}) {
        double closed = 2.0 * (geo(1.0 - s) - geo(1.0));
        auto r = orlicz::modular(phi, y, s);
        CHECK(r.value == doctest::Approx(closed).epsilon(1e-12));
    }

    // Consistency with the truncated market at N = 60: the tail past the
    // truncation is ~e^{-30} at s = 1/2.
    GapMarket m(60);
    orlicz::FiniteRandomVariable fin{m.y_shock(2), m.probs()};
    double finite_mod = orlicz::modular(phi, fin, 0.5).value;
    double series_mod = orlicz::modular(phi, y, 0.5).value;
    CHECK(series_mod == doctest::Approx(finite_mod).epsilon(1e-10));

    // The gauge norm sits strictly above 1 even though scaled modulars die.
    auto nrm = orlicz::gauge_norm(phi, y);
    CHECK(nrm.value > 2.0);
    CHECK(nrm.value < 3.0);
    CHECK(nrm.modular_residual < 1e-9);
}

}  // TEST_SUITE
