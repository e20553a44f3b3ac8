#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "duality/json_io.hpp"

using namespace duality;
using nlohmann::json;

namespace {

void check_same_spec(const UtilitySpec& a, const UtilitySpec& b) {
    CHECK(a.family() == b.family());
    CHECK(a.params() == b.params());
    CHECK(a.offset() == b.offset());
    for (double x : {-1.5, -0.25, 0.0, 0.5, 2.0}) {
        double va = a.value(x), vb = b.value(x);
        if (std::isfinite(va) || std::isfinite(vb))
            CHECK(va == doctest::Approx(vb).epsilon(1e-15));
    }
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("market json round trip") {
    market::FiniteMarket m({0.5, 0.3, 0.2},
                           {market::Generator{{1.0, -1.0, 0.0}, true},
                            market::Generator{{0.0, 1.0, -1.0}, false}},
                           {0.1, 0.0, 0.2});
    json j = io::market_to_json(m);
    // Serialize through text to exercise the number formatting as well.
    json j2 = json::parse(j.dump());
    auto m2 = io::market_from_json(j2);

    CHECK(m2.probs() == m.probs());
    REQUIRE(m2.generators().size() == 2);
    CHECK(m2.generators()[0].payoff == m.generators()[0].payoff);
    CHECK(m2.generators()[0].two_sided);
    CHECK_FALSE(m2.generators()[1].two_sided);
    CHECK(m2.endowment() == m.endowment());
}

TEST_CASE("market json defaults and rejects") {
    json j = {{"probs", {0.25, 0.75}},
              {"generators", json::array({{{"payoff", {1.0, -1.0}}}})}};
    auto m = io::market_from_json(j);
    CHECK(m.endowment() == std::vector<double>{0.0, 0.0});
    CHECK(m.generators()[0].two_sided);  // "sided" defaults to two

    json bad = j;
    bad["generators"][0]["sided"] = "both";
    CHECK_THROWS_AS((void)io::market_from_json(bad), std::invalid_argument);

    json scalar = j;
    scalar["probs"] = 1.0;
    CHECK_THROWS_AS((void)io::market_from_json(scalar), std::invalid_argument);

    json missing = {{"probs", {0.5, 0.5}}};
    CHECK_THROWS((void)io::market_from_json(missing));
}

TEST_CASE("utility json round trips per family") {
    std::vector<UtilitySpec> specs = {
        UtilitySpec::exponential(2.0),
        UtilitySpec::logarithmic(0.5),
        UtilitySpec::power(0.5),
        UtilitySpec::power(-1.0),
        UtilitySpec::quadratic(),
        UtilitySpec::truncated_quadratic(1.5),
        UtilitySpec::piecewise_linear({2.0, 1.0, 0.5}, {-1.0, 1.0}),
        UtilitySpec::exponential(1.0).shifted(0.75),
    };
    for (const auto& u : specs) {
        json j = io::utility_to_json(u);
        auto back = io::utility_from_json(json::parse(j.dump()));
        check_same_spec(u, back);
    }
}

TEST_CASE("offset key appears only when nonzero") {
    json plain = io::utility_to_json(UtilitySpec::quadratic());
    CHECK_FALSE(plain.contains("offset"));
    json shifted = io::utility_to_json(UtilitySpec::quadratic().shifted(0.25));
    CHECK(shifted["offset"] == 0.25);
}

TEST_CASE("piecewise serialization splits kinks and slopes") {
    auto u = UtilitySpec::piecewise_linear({2.0, 1.0, 0.5}, {-1.0, 1.0});
    json j = io::utility_to_json(u);
    CHECK(j["slopes"] == json({2.0, 1.0, 0.5}));
    CHECK(j["kinks"] == json({-1.0, 1.0}));
    CHECK_FALSE(j.contains("params"));
}

TEST_CASE("custom utilities refuse to serialize") {
    auto u = UtilitySpec::custom([](double x) { return -std::exp(-x); },
                                 [](double x) { return std::exp(-x); },
                                 -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS((void)io::utility_to_json(u), std::invalid_argument);
}

TEST_CASE("utility json rejects") {
    CHECK_THROWS_AS((void)io::utility_from_json(json{{"family", "cubic"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)io::utility_from_json(json{{"family", "power"}}),
                    std::invalid_argument);
    CHECK_THROWS((void)io::utility_from_json(json{{"family", "piecewise_linear"}}));
}

TEST_CASE("compact utility forms") {
    check_same_spec(io::parse_utility("exp:2"), UtilitySpec::exponential(2.0));
    check_same_spec(io::parse_utility("exponential"), UtilitySpec::exponential(1.0));
    check_same_spec(io::parse_utility("log"), UtilitySpec::logarithmic(1.0));
    check_same_spec(io::parse_utility("log:0.5"), UtilitySpec::logarithmic(0.5));
    check_same_spec(io::parse_utility("power:0.5"), UtilitySpec::power(0.5));
    check_same_spec(io::parse_utility("quadratic"), UtilitySpec::quadratic());
    check_same_spec(io::parse_utility("tquad:1.5"),
                    UtilitySpec::truncated_quadratic(1.5));
    check_same_spec(io::parse_utility(R"({"family":"power","params":[-1.0]})"),
                    UtilitySpec::power(-1.0));

    CHECK_THROWS_AS((void)io::parse_utility(""), std::invalid_argument);
    CHECK_THROWS_AS((void)io::parse_utility("power"), std::invalid_argument);
    // Unrecognized names fall through to file loading.
    CHECK_THROWS_AS((void)io::parse_utility("no_such_family"), std::runtime_error);
}

TEST_CASE("file loading") {
    const std::string path = "/tmp/duality_io_test_utility.json";
    {
        std::ofstream out(path);
        out << R"({"family":"truncated_quadratic","params":[2.5],"offset":0.1})";
    }
    auto u = io::load_utility(path);
    check_same_spec(u, UtilitySpec::truncated_quadratic(2.5).shifted(0.1));
    check_same_spec(io::parse_utility(path), u);
    std::remove(path.c_str());

    const std::string mpath = "/tmp/duality_io_test_market.json";
    {
        std::ofstream out(mpath);
        out << R"({"probs":[0.6,0.4],"generators":[{"payoff":[1,-1],"sided":"one"}]})";
    }
    auto m = io::load_market(mpath);
    CHECK(m.probs() == std::vector<double>{0.6, 0.4});
    CHECK_FALSE(m.generators()[0].two_sided);
    std::remove(mpath.c_str());

    CHECK_THROWS_WITH_AS((void)io::load_market("/nonexistent/market.json"),
                         "cannot open /nonexistent/market.json", std::runtime_error);
    CHECK_THROWS_AS((void)io::load_utility("/nonexistent/utility.json"),
                    std::runtime_error);
}

}  // TEST_SUITE
