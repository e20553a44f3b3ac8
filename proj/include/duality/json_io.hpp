#pragma once

#include <string>

#include "duality/market.hpp"
#include "duality/utility.hpp"
#include "json.hpp"

/// JSON round-trip for market and utility specifications.
///
/// Market schema:
///   { "probs": [..], "generators": [{"payoff": [..], "sided": "one"|"two"}],
///     "endowment": [..] }          (endowment optional, defaults to zero)
///
/// Utility schema:
///   { "family": "exponential", "params": [rate], "offset": 0.0 }
///   piecewise_linear uses "slopes" and "kinks" arrays instead of "params";
///   custom utilities have no serialized form.

namespace duality::io {

market::FiniteMarket market_from_json(const nlohmann::json& j);
nlohmann::json market_to_json(const market::FiniteMarket& m);

UtilitySpec utility_from_json(const nlohmann::json& j);
nlohmann::json utility_to_json(const UtilitySpec& u);

market::FiniteMarket load_market(const std::string& path);
UtilitySpec load_utility(const std::string& path);

/// Compact CLI form: "exponential", "exp:2", "log", "log:0.5", "power:0.5",
/// "quadratic", "tquad:1.5", or an inline JSON object / a path to one.
UtilitySpec parse_utility(const std::string& text);

}  // namespace duality::io
