#include "duality/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace duality::io {

namespace {

std::vector<double> doubles(const nlohmann::json& j, const char* what) {
    if (!j.is_array())
        throw std::invalid_argument(std::string(what) + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

nlohmann::json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace

market::FiniteMarket market_from_json(const nlohmann::json& j) {
    std::vector<double> probs = doubles(j.at("probs"), "probs");
    std::vector<market::Generator> gens;
    for (const auto& gj : j.at("generators")) {
        market::Generator g;
        g.payoff = doubles(gj.at("payoff"), "payoff");
        std::string sided = gj.value("sided", "two");
        if (sided == "two")
            g.two_sided = true;
        else if (sided == "one")
            g.two_sided = false;
        else
            throw std::invalid_argument("generator sided must be \"one\" or \"two\"");
        gens.push_back(std::move(g));
    }
    std::vector<double> endow(probs.size(), 0.0);
    if (j.contains("endowment")) endow = doubles(j.at("endowment"), "endowment");
    return market::FiniteMarket(probs, gens, endow);
}

nlohmann::json market_to_json(const market::FiniteMarket& m) {
    nlohmann::json j;
    j["probs"] = m.probs();
    j["generators"] = nlohmann::json::array();
    for (const market::Generator& g : m.generators()) {
        nlohmann::json gj;
        gj["payoff"] = g.payoff;
        gj["sided"] = g.two_sided ? "two" : "one";
        j["generators"].push_back(std::move(gj));
    }
    j["endowment"] = m.endowment();
    return j;
}

UtilitySpec utility_from_json(const nlohmann::json& j) {
    std::string family = j.at("family").get<std::string>();
    std::vector<double> params;
    if (j.contains("params")) params = doubles(j.at("params"), "params");
    auto param = [&params](std::size_t i, double fallback) {
        return params.size() > i ? params[i] : fallback;
    };

    UtilitySpec u = [&]() {
        if (family == "exponential") return UtilitySpec::exponential(param(0, 1.0));
        if (family == "logarithmic") return UtilitySpec::logarithmic(param(0, 1.0));
        if (family == "power") {
            if (params.empty()) throw std::invalid_argument("power: missing exponent");
            return UtilitySpec::power(params[0]);
        }
        if (family == "quadratic") return UtilitySpec::quadratic();
        if (family == "truncated_quadratic") {
            if (params.empty()) throw std::invalid_argument("truncated_quadratic: missing bliss");
            return UtilitySpec::truncated_quadratic(params[0]);
        }
        if (family == "piecewise_linear") {
            return UtilitySpec::piecewise_linear(doubles(j.at("slopes"), "slopes"),
                                                 doubles(j.at("kinks"), "kinks"));
        }
        throw std::invalid_argument("unknown utility family \"" + family + "\"");
    }();

    double offset = j.value("offset", 0.0);
    return offset == 0.0 ? u : u.shifted(offset);
}

nlohmann::json utility_to_json(const UtilitySpec& u) {
    if (u.family() == UtilityFamily::custom)
        throw std::invalid_argument("custom utilities have no serialized form");
    nlohmann::json j;
    j["family"] = to_string(u.family());
    if (u.family() == UtilityFamily::piecewise_linear) {
        const std::vector<double>& p = u.params();
        std::size_t ns = (p.size() + 1) / 2;
        std::size_t nk = ns - 1;
        j["kinks"] = std::vector<double>(p.begin(), p.begin() + nk);
        j["slopes"] = std::vector<double>(p.begin() + nk, p.end());
    } else if (!u.params().empty()) {
        j["params"] = u.params();
    }
    if (u.offset() != 0.0) j["offset"] = u.offset();
    return j;
}

market::FiniteMarket load_market(const std::string& path) {
    return market_from_json(load_file(path));
}

UtilitySpec load_utility(const std::string& path) {
    return utility_from_json(load_file(path));
}

UtilitySpec parse_utility(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty utility spec");
    if (text.front() == '{') return utility_from_json(nlohmann::json::parse(text));

    std::string name = text;
    std::vector<double> args;
    if (auto colon = text.find(':'); colon != std::string::npos) {
        name = text.substr(0, colon);
        std::string rest = text.substr(colon + 1);
        std::size_t pos = 0;
        while (pos < rest.size()) {
            std::size_t next = rest.find(',', pos);
            if (next == std::string::npos) next = rest.size();
            args.push_back(std::stod(rest.substr(pos, next - pos)));
            pos = next + 1;
        }
    }
    auto arg = [&args](std::size_t i, double fallback) {
        return args.size() > i ? args[i] : fallback;
    };

    if (name == "exp" || name == "exponential") return UtilitySpec::exponential(arg(0, 1.0));
    if (name == "log" || name == "logarithmic") return UtilitySpec::logarithmic(arg(0, 1.0));
    if (name == "power") {
        if (args.empty()) throw std::invalid_argument("power utility needs an exponent");
        return UtilitySpec::power(args[0]);
    }
    if (name == "quadratic" || name == "quad") return UtilitySpec::quadratic();
    if (name == "tquad" || name == "truncated_quadratic") {
        if (args.empty()) throw std::invalid_argument("truncated quadratic needs a bliss point");
        return UtilitySpec::truncated_quadratic(args[0]);
    }
    // Anything else is treated as a file path.
    return load_utility(text);
}

}  // namespace duality::io
