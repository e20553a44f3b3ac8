#include <cstdint>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "duality/acceptance.hpp"
#include "duality/gap.hpp"
#include "duality/json_io.hpp"
#include "duality/levy.hpp"
#include "duality/market.hpp"
#include "duality/orlicz.hpp"
#include "duality/scalar.hpp"
#include "duality/utility.hpp"
#include "json.hpp"

// Command-line front end. Exit codes: 0 success, 1 malformed input or runtime
// error, 2 acceptance-suite failure (first failing criterion on stderr).
// Reports are deterministic for a fixed config and seed; CSV uses '.'
// decimals and 17 significant digits. ORLICZ_DUALITY_THREADS caps internal
// parallelism (row-level, merged by index, output order fixed).

namespace {

constexpr int kSchemaVersion = 1;

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        out.push_back(std::stod(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

void emit(const nlohmann::json& j, const std::string& format) {
    if (format == "json") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    // csv / pretty: flatten scalars as key,value rows; arrays of objects as
    // tables with a header.
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it->is_array() && !it->empty() && it->front().is_object()) {
            std::cout << "table," << it.key() << "\n";
            const auto& first = it->front();
            std::string header;
            for (auto f = first.begin(); f != first.end(); ++f)
                header += (header.empty() ? "" : ",") + f.key();
            std::cout << header << "\n";
            for (const auto& row : *it) {
                std::string line;
                for (auto f = row.begin(); f != row.end(); ++f) {
                    if (!line.empty()) line += ",";
                    line += f->is_number() ? num(f->get<double>())
                                           : f->dump();
                }
                std::cout << line << "\n";
            }
        } else if (it->is_number()) {
            std::cout << it.key() << "," << num(it->get<double>()) << "\n";
        } else {
            std::cout << it.key() << "," << it->dump() << "\n";
        }
    }
}

int run_solve(const std::string& market_path, const std::string& utility_text,
              double tol, const std::string& format) {
    duality::market::FiniteMarket m = duality::io::load_market(market_path);
    duality::UtilitySpec u = duality::io::parse_utility(utility_text);

    duality::market::ArbitrageReport arb = duality::market::check_no_arbitrage(m);
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["subcommand"] = "solve";
    j["arbitrage_free"] = arb.arbitrage_free;
    if (!arb.arbitrage_free) {
        j["witness_kind"] = arb.witness_kind;
        j["witness"] = arb.witness;
        emit(j, format);
        std::cerr << "market admits arbitrage; no optimum exists\n";
        return 1;
    }

    duality::market::PrimalSolution p = duality::market::solve_primal(m, u, tol);
    duality::market::DualSolution d = duality::market::solve_dual(m, u, tol);
    j["primal"] = {{"value", p.value},
                   {"theta", p.theta},
                   {"x_hat", p.x_hat},
                   {"boundary", p.boundary_flag},
                   {"iterations", p.iterations}};
    j["dual"] = {{"value", d.value},
                 {"support_term", d.support_term},
                 {"endowment_term", d.endowment_term},
                 {"completion", duality::market::to_string(d.completion)},
                 {"q_hat", d.q_hat},
                 {"iterations", d.iterations}};
    j["gap"] = d.value - p.value;
    try {
        duality::market::CornerReport cr = duality::market::classify_corner(
            m.probs(), m.endowment(), p, d, u);
        j["corner"] = {{"corner", cr.corner},
                       {"corner_mass", cr.corner_mass},
                       {"support_cone_part", cr.support_cone_part},
                       {"max_fenchel_gap", cr.max_fenchel_gap},
                       {"max_pointwise_dev", cr.max_pointwise_dev},
                       {"subgradient_dependent", cr.subgradient_dependent}};
    } catch (const std::exception& e) {
        j["corner_error"] = e.what();
    }
    emit(j, format);
    return 0;
}

int run_levy(double bx, double horizon, int nmax, const std::string& format) {
    duality::levy::LevyModel m(bx, horizon);
    duality::levy::CornerAnalysis ca = duality::levy::corner_analysis(m);
    std::vector<duality::levy::DualSequenceRow> rows = duality::levy::dual_sequence(m, nmax);

    if (format == "csv") {
        std::cout << "n,k_n,b_n,c_n,drift_l,drift_lnz_q,value,value_entropy_route,"
                     "residual_b2\n";
        for (const auto& row : rows)
            std::cout << row.n << "," << num(row.k_n) << "," << num(row.b_n) << ","
                      << num(row.c_n) << "," << num(row.drift_l) << ","
                      << num(row.drift_lnz_q) << "," << num(row.value) << ","
                      << num(row.value_entropy_route) << "," << num(row.residual_b2)
                      << "\n";
        return 0;
    }
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["subcommand"] = "levy";
    j["drift"] = bx;
    j["horizon"] = horizon;
    j["corner"] = {{"a_closed", ca.a_closed},
                   {"a_quadrature", ca.a_quadrature},
                   {"optimal_theta", ca.optimal_theta},
                   {"value", ca.value}};
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows)
        j["rows"].push_back({{"n", row.n},
                             {"k_n", row.k_n},
                             {"b_n", row.b_n},
                             {"c_n", row.c_n},
                             {"drift_l", row.drift_l},
                             {"drift_lnz_q", row.drift_lnz_q},
                             {"value", row.value},
                             {"value_entropy_route", row.value_entropy_route},
                             {"residual_b2", row.residual_b2}});
    emit(j, format);
    return 0;
}

int run_gap(int n, bool with_moment15, const std::string& format) {
    duality::gap::GapMarket m(n);
    duality::gap::GapCertificate cert = duality::gap::gap_certificate(m);
    duality::gap::Completions comp = duality::gap::completions(m);
    duality::gap::MechanicsReport mech =
        duality::gap::gap_mechanics(m, {{2, 0.5}});

    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["subcommand"] = "gap";
    j["truncation"] = n;
    j["u_over_c"] = cert.u_over_c;
    j["u_over_bipolar"] = cert.u_over_bipolar;
    j["strict_gap"] = cert.strict_gap;
    j["margin"] = cert.margin;
    j["lambda_hat_boxed"] = cert.lambda_hat_boxed;
    j["lambda_hat_free"] = cert.lambda_hat_free;
    j["sampled_strategies"] = cert.sampled_strategies;
    j["sampled_best"] = cert.sampled_best;
    j["entropy_full"] = comp.entropy_full;
    j["corner_value"] = comp.corner_value;
    j["identity_residual"] = comp.identity_residual;
    j["separating_residual"] = comp.separating_residual;
    j["mechanics_half_shock"] = {{"xi_total", mech.xi_total},
                                 {"e_exp_z", mech.e_exp_z},
                                 {"jensen_mid", mech.jensen_mid},
                                 {"jensen_rhs", mech.jensen_rhs},
                                 {"jensen_chain_holds", mech.jensen_chain_holds},
                                 {"stabilizes", mech.stabilizes}};
    for (const auto& g : mech.growth)
        j["mechanics_half_shock"]["growth"].push_back({{"truncation", g.first},
                                                       {"value", g.second}});

    duality::orlicz::YoungFunction exp1 = duality::orlicz::YoungFunction::exponential();
    j["shock_table"] = nlohmann::json::array();
    for (int k : {2, 5, 10, 20}) {
        if (k > n) break;
        duality::orlicz::SeriesRandomVariable yk = duality::gap::y_shock_series(k);
        duality::orlicz::ModularResult half = duality::orlicz::modular(exp1, yk, 0.5);
        duality::orlicz::GaugeNorm norm = duality::orlicz::gauge_norm(exp1, yk);
        j["shock_table"].push_back(
            {{"k", k}, {"modular_half", half.value}, {"gauge_norm", norm.value}});
    }
    if (with_moment15) {
        duality::gap::Moment15Report m15 = duality::gap::moment15_variant(n);
        j["moment15"] = {{"lambda_hat", m15.lambda_hat},
                         {"marginal_at_boundary", m15.marginal_at_boundary},
                         {"lattice_drag", m15.lattice_drag},
                         {"boundary_binding", m15.boundary_binding}};
    }
    emit(j, format);
    return 0;
}

int run_orlicz(const std::string& phi_text, std::uint64_t seed, int samples,
               const std::string& format) {
    duality::orlicz::YoungFunction phi = [&]() {
        if (phi_text == "exp" || phi_text == "exponential")
            return duality::orlicz::YoungFunction::exponential();
        if (phi_text.rfind("power:", 0) == 0)
            return duality::orlicz::YoungFunction::power(std::stod(phi_text.substr(6)));
        throw std::invalid_argument("unknown Young function \"" + phi_text +
                                    "\" (use exp or power:p)");
    }();

    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["subcommand"] = "orlicz";
    j["phi"] = phi.name();
    j["seed"] = seed;

    std::vector<double> grid;
    for (double x = 1.0; x <= 1e4; x *= 1.25) grid.push_back(x);
    try {
        duality::orlicz::Delta2Report d2 = duality::orlicz::delta2_check(phi, 1.0, grid);
        if (d2.satisfied)
            j["delta2"] = {{"satisfied", true}, {"growth_constant", d2.growth_constant}};
        else
            j["delta2"] = {{"satisfied", false},
                           {"witness_x", d2.witness_x},
                           {"witness_ratio", d2.witness_ratio}};
    } catch (const std::exception& e) {
        j["delta2"] = {{"inconclusive", e.what()}};
    }

    // Randomized homogeneity audit of the gauge norm.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> out(0.0, 2.0);
    std::uniform_real_distribution<double> pw(0.1, 1.0);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        std::size_t ns = 2 + static_cast<std::size_t>(i % 6);
        duality::orlicz::FiniteRandomVariable x;
        x.outcomes.resize(ns);
        x.probs.resize(ns);
        double s = 0;
        for (std::size_t a = 0; a < ns; ++a) {
            x.outcomes[a] = out(rng);
            x.probs[a] = pw(rng);
            s += x.probs[a];
        }
        for (std::size_t a = 0; a < ns; ++a) x.probs[a] /= s;
        double base = duality::orlicz::gauge_norm(phi, x).value;
        duality::orlicz::FiniteRandomVariable x2 = x;
        for (double& o : x2.outcomes) o *= 2.0;
        double got = duality::orlicz::gauge_norm(phi, x2).value;
        worst = std::max(worst, std::abs(got - 2.0 * base) / (1.0 + 2.0 * base));
    }
    j["homogeneity_samples"] = samples;
    j["homogeneity_worst_rel_dev"] = worst;

    // Shock table: the series tail bounds are exact for the exponential pairing.
    if (phi.name() == "exp1") {
        j["shock_table"] = nlohmann::json::array();
        for (int k : {2, 5, 10, 20}) {
            duality::orlicz::SeriesRandomVariable yk = duality::gap::y_shock_series(k);
            duality::orlicz::ModularResult half = duality::orlicz::modular(phi, yk, 0.5);
            duality::orlicz::GaugeNorm norm = duality::orlicz::gauge_norm(phi, yk);
            j["shock_table"].push_back(
                {{"k", k}, {"modular_half", half.value}, {"gauge_norm", norm.value}});
        }
    }
    emit(j, format);
    return 0;
}

int run_conjugate(const std::string& utility_text, const std::string& ys_text,
                  const std::string& format) {
    duality::UtilitySpec u = duality::io::parse_utility(utility_text);
    duality::ConjugatePair pair = duality::conjugate(u);
    std::vector<double> ys =
        ys_text.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0} : parse_list(ys_text);

    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["subcommand"] = "conjugate";
    j["utility"] = duality::io::utility_to_json(u);
    j["case"] = duality::to_string(pair.case_tag);
    j["marginal_at_zero"] = pair.a;
    j["rows"] = nlohmann::json::array();
    for (double y : ys)
        j["rows"].push_back({{"y", y},
                             {"v", pair.v(y)},
                             {"v_prime", pair.v_prime(y)},
                             {"v_hat", pair.v_hat(y)}});
    emit(j, format);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Orlicz-space utility duality toolkit"};
    app.require_subcommand(1);

    std::string market_path, utility_text = "exp", format = "json", ys_text;
    std::string phi_text = "exp";
    double tol = 1e-6, bx = -2.0, horizon = 1.0;
    int nmax = 10, gap_n = 40, samples = 100;
    std::uint64_t seed = 20240901;
    bool with_moment15 = false;

    CLI::App* solve = app.add_subcommand("solve", "primal and dual optimum of a market file");
    solve->add_option("--market", market_path, "market JSON path")->required();
    solve->add_option("--utility", utility_text, "utility spec (e.g. exp, log, power:0.5)");
    solve->add_option("--tol", tol, "solver tolerance")->check(CLI::PositiveNumber);
    solve->add_option("--report", format, "json, csv or pretty");

    CLI::App* levy = app.add_subcommand("levy", "corner example: dual upper-bound sequence");
    levy->add_option("--bx", bx, "drift of the jump process");
    levy->add_option("--T", horizon, "horizon")->check(CLI::PositiveNumber);
    levy->add_option("--nmax", nmax, "number of rows")->check(CLI::PositiveNumber);
    levy->add_option("--out,--report", format, "json or csv");

    CLI::App* gapc = app.add_subcommand("gap", "duality-gap market certificate");
    gapc->add_option("--N", gap_n, "truncation level")->check(CLI::PositiveNumber);
    gapc->add_flag("--moment15", with_moment15, "include the order-1.5 moment variant");
    gapc->add_option("--report", format, "json, csv or pretty");

    CLI::App* orl = app.add_subcommand("orlicz", "gauge norms, Delta2 and shock table");
    orl->add_option("--phi", phi_text, "Young function: exp or power:p");
    orl->add_option("--samples", samples, "random homogeneity samples")
        ->check(CLI::PositiveNumber);
    orl->add_option("--seed", seed, "sampling seed");
    orl->add_option("--report", format, "json, csv or pretty");

    CLI::App* conj = app.add_subcommand("conjugate", "concave conjugate table of a utility");
    conj->add_option("--utility", utility_text, "utility spec");
    conj->add_option("--ys", ys_text, "comma-separated evaluation points");
    conj->add_option("--report", format, "json, csv or pretty");

    CLI::App* acc = app.add_subcommand("acceptance", "run the acceptance criteria battery");
    (void)acc;

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(market_path, utility_text, tol, format);
        if (levy->parsed()) return run_levy(bx, horizon, nmax, format);
        if (gapc->parsed()) return run_gap(gap_n, with_moment15, format);
        if (orl->parsed()) return run_orlicz(phi_text, seed, samples, format);
        if (conj->parsed()) return run_conjugate(utility_text, ys_text, format);
        if (acc->parsed()) {
            duality::AcceptanceReport rep = duality::run_acceptance(std::cout, std::cerr);
            if (!rep.all_passed) {
                std::cerr << "first failing criterion: " << rep.first_failure << "\n";
                return 2;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
