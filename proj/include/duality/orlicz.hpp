#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "duality/extended.hpp"

/// Orlicz-space machinery over countable probability spaces: modulars
/// rho(X) = E[Phi(X)], gauge norms inf{lambda : rho(X/lambda) <= 1}, the
/// Delta_2 growth check at infinity, and the modular-vs-norm convergence
/// diagnostic that separates the two convergence modes.

namespace duality::orlicz {

struct NonFiniteNorm : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TailBoundUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InconclusiveGrid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Even convex Phi with Phi(0) = 0, finite or +inf valued.
class YoungFunction {
  public:
    static YoungFunction exponential();      ///< e^{|x|} - 1
    static YoungFunction power(double p);    ///< |x|^p, p >= 1
    static YoungFunction make(std::string name, std::function<double(double)> fn);

    double operator()(double x) const { return fn_(x); }
    const std::string& name() const { return name_; }

  private:
    YoungFunction(std::string name, std::function<double(double)> fn);
    std::string name_;
    std::function<double(double)> fn_;
};

struct FiniteRandomVariable {
    std::vector<double> outcomes;
    std::vector<double> probs;

    /// Throws unless sizes match, probs are nonnegative and sum to 1 within
    /// 1e-12 (an explicit tolerance override covers deliberately truncated
    /// spaces whose mass is certifiably short).
    void validate(double mass_tol = 1e-12) const;
};

struct SeriesTerm {
    double outcome;
    double prob;
};

/// Countable random variable given by enumerated terms plus a certified tail
/// bound. tail_bound(k, scale) bounds sum_{j >= k} prob_j * Phi(scale *
/// outcome_j) from above; it returns +inf only when the remainder provably
/// diverges (e.g. terms bounded below), and nullopt when no bound exists at
/// that scale.
struct SeriesRandomVariable {
    std::function<SeriesTerm(std::size_t)> term;
    std::function<std::optional<double>(std::size_t, double)> tail_bound;
};

struct ModularResult {
    double value;        ///< may be +inf
    double error_bound;  ///< certified truncation error (0 for finite spaces)
};

/// E[Phi(scale * X)] evaluated exactly (finite) or by certified truncation
/// (series: terms summed until the tail bound drops below 1e-12 of the running
/// total, hard cap 1e7 terms, TailBoundUnavailable past the cap).
ModularResult modular(const YoungFunction& phi, const FiniteRandomVariable& x,
                      double scale = 1.0);
ModularResult modular(const YoungFunction& phi, const SeriesRandomVariable& x,
                      double scale = 1.0);

struct GaugeNorm {
    double value;
    double modular_residual;  ///< |rho(X/value) - 1| where finite
    double bracket_width;     ///< final bisection bracket (absolute)
};

/// Gauge (Luxemburg) norm by bisection on [1e-12, 1e12] (geometric, then
/// arithmetic; 200 iterations) with a secant polish once the modular is finite
/// at both bracket ends. NonFiniteNorm if rho(X/1e12) still exceeds 1.
GaugeNorm gauge_norm(const YoungFunction& phi, const FiniteRandomVariable& x);
GaugeNorm gauge_norm(const YoungFunction& phi, const SeriesRandomVariable& x);

struct Delta2Report {
    bool satisfied;
    double growth_constant;  ///< certified K over the grid (satisfied case)
    double witness_x;        ///< first x with exploding ratio (violated case)
    double witness_ratio;
    double x0;
};

/// Checks Phi(2x) <= K Phi(x) for x > x0 on the given grid (which must span
/// at least three decades above x0). Violated when the ratio crosses
/// `explosion_threshold`; InconclusiveGrid when the ratio still grows at the
/// right edge without crossing it.
Delta2Report delta2_check(const YoungFunction& phi, double x0,
                          const std::vector<double>& grid,
                          double explosion_threshold = 1e6);

struct ConvergenceRow {
    std::size_t k;
    std::vector<double> modulars;  ///< rho(scale_i * Y_k), one per scaling
    double norm;
};

struct ConvergenceReport {
    std::vector<double> scalings;
    std::vector<ConvergenceRow> rows;
    bool modular_to_zero;   ///< some scaling column decays to ~0
    bool norm_not_to_zero;  ///< norms stay bounded away from 0
};

ConvergenceReport modular_vs_norm(
    const YoungFunction& phi,
    const std::function<SeriesRandomVariable(std::size_t)>& sequence,
    const std::vector<std::size_t>& ks, const std::vector<double>& scalings);

struct HolderReport {
    double lhs;  ///< E|XY|
    double rhs;  ///< 2 ||X||_phi ||Y||_psi
    bool holds;
};

/// Orlicz Hoelder inequality on a shared finite space (probs must agree).
HolderReport holder_check(const FiniteRandomVariable& x,
                          const FiniteRandomVariable& y,
                          const YoungFunction& phi, const YoungFunction& psi);

struct Membership {
    bool in_space;  ///< X in L^Phi
    bool in_heart;  ///< X in the Orlicz heart M^Phi
    std::string reason;
};

/// On a finite probability space every variable lies in both the space and
/// the heart: E[Phi(lambda X)] is a finite sum for every lambda.
Membership membership(const FiniteRandomVariable& x);

}  // namespace duality::orlicz
