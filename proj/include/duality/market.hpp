#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "duality/utility.hpp"

/// One-period finite-state markets: a cone of attainable claims spanned by
/// generators (two-sided lines or one-sided rays), an endowment, and the
/// primal/dual expected-utility machinery with zero-gap verification, corner
/// classification and complete-market values.

namespace duality::market {

struct InfeasibleCore : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnboundedUtility : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DualDiverges : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotBlissFree : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Generator {
    std::vector<double> payoff;
    bool two_sided = true;  ///< false: ray only (e.g. no short sales)
};

/// Probability vector, claim generators and endowment. States with zero
/// probability are dropped at construction (everything downstream is P-a.s.).
class FiniteMarket {
  public:
    FiniteMarket(std::vector<double> probs, std::vector<Generator> generators,
                 std::vector<double> endowment);

    std::size_t n_states() const { return probs_.size(); }
    std::size_t n_generators() const { return generators_.size(); }
    const std::vector<double>& probs() const { return probs_; }
    const std::vector<Generator>& generators() const { return generators_; }
    const std::vector<double>& endowment() const { return endowment_; }

    double expectation(const std::vector<double>& claim) const;

    /// Sum_j theta_j * generator_j.
    std::vector<double> combine(const std::vector<double>& theta) const;

  private:
    std::vector<double> probs_;
    std::vector<Generator> generators_;
    std::vector<double> endowment_;
};

struct ArbitrageReport {
    bool arbitrage_free;
    /// Strictly positive separating density when arbitrage_free, otherwise a
    /// nonnegative nonzero attainable claim.
    std::vector<double> witness;
    std::string witness_kind;  ///< "separating_density" or "arbitrage_claim"
};

/// Kreps-Yan at finite scale: either a density Y >= 1 with E[gY] <= 0 for
/// every generator (= 0 for two-sided), or an attainable claim >= 0, != 0.
/// Exactly one of the two linear programs succeeds.
ArbitrageReport check_no_arbitrage(const FiniteMarket& m);

struct PrimalSolution {
    std::vector<double> x_hat;  ///< attained claim (endowment excluded)
    std::vector<double> theta;
    double value;        ///< E[U(B + x_hat)]
    bool boundary_flag;  ///< a domain constraint is active at the optimum
    std::size_t iterations;
};

/// Maximizes E[U(B + sum theta_j g_j)] over admissible theta, with
/// componentwise domain constraints when dom U is bounded below (box shrunk
/// by 1e-9 to keep iterates interior; hits reported via boundary_flag).
/// Golden section for one generator, projected gradient ascent otherwise.
PrimalSolution solve_primal(const FiniteMarket& m, const UtilitySpec& u,
                            double tol = 1e-9);

enum class Completion { full, effective };
std::string to_string(Completion c);

struct DualSolution {
    std::vector<double> y_hat;  ///< nonnegative density (not normalized)
    double value;               ///< I_V(y_hat) + support_term
    double support_term;        ///< sup over attainable-and-admissible X of E[X y_hat]
    double endowment_term;      ///< E[B y_hat], the endowment part of support_term
    Completion completion;      ///< full iff support_term - endowment_term <= 1e-8
    std::vector<double> q_hat;  ///< y_hat / E[y_hat] (zeros when y_hat = 0)
    std::size_t iterations;
};

/// Minimizes I_V(Y) + delta*(Y) over Y >= 0, where delta*(Y) is the support
/// function of the attainable-and-admissible set (endowment included). Cone
/// directions enter as lazily discovered polar constraints; projected
/// gradient descent with a diminishing-step fallback for polyhedral V.
DualSolution solve_dual(const FiniteMarket& m, const UtilitySpec& u,
                        double tol = 1e-9);

struct SupportEval {
    double value;  ///< +inf when the supremum diverges
    std::vector<double> theta;
    bool finite;
};

/// delta*(Y) = sup { E[XY] : X = B + sum theta g - slack, X admissible }.
/// Exact: polar-cone membership test when dom U is unbounded below, an LP
/// over the domain polytope otherwise.
SupportEval support_function(const FiniteMarket& m, const UtilitySpec& u,
                             const std::vector<double>& y);

/// I_V(Y) = E[V(Y)] for the conjugate pair of u.
double expected_conjugate(const FiniteMarket& m, const UtilitySpec& u,
                          const std::vector<double>& y);

struct CompleteMarketValue {
    double value;
    double lambda_hat;
    /// Exponential family only: the closed form -E[Z] e^{-E[Z ln Z]/E[Z]},
    /// asserted to agree with the minimization within 1e-9.
    std::optional<double> closed_form;
};

/// u_Q(0) = min_{lambda > 0} I_V(lambda dQ/dP) for the completed market with
/// pricing density q (state weights of Q; need not sum to one). Throws
/// NotBlissFree when I_V(lambda q) is infinite for every lambda.
CompleteMarketValue complete_market_value(const std::vector<double>& probs,
                                          const std::vector<double>& q,
                                          const UtilitySpec& u);

struct CornerReport {
    double corner_mass;        ///< E[x_hat * U'(B + x_hat)]
    double support_cone_part;  ///< dual support_term - endowment_term
    bool corner;               ///< both exceed tol
    double max_fenchel_gap;    ///< max_i |U(B+x) - (B+x) y - V(y)|
    double max_pointwise_dev;  ///< max_i |y_hat_i - U'(B_i + x_hat_i)|
    bool subgradient_dependent;  ///< an optimal state sits at a kink of U
};

/// Consistency report between a primal/dual pair: the corner mass
/// E[x_hat U'(B+x_hat)] must match the cone part of the dual support term
/// (within agreement_tol, throws otherwise), the pair must satisfy the
/// pointwise Fenchel equality on interior states, and the solution is a
/// corner when both exceed corner_tol.
CornerReport classify_corner(const std::vector<double>& probs,
                             const std::vector<double>& endowment,
                             const PrimalSolution& p, const DualSolution& d,
                             const UtilitySpec& u, double corner_tol = 1e-8,
                             double agreement_tol = 1e-6);

struct IndirectUtilityRow {
    double x;       ///< gauge-norm budget
    double value;   ///< sup of normalized E[U(Z + G theta)] over the ball
    double ratio;   ///< value / x
};

struct IndirectUtilityProfile {
    std::vector<IndirectUtilityRow> rows;
    bool sublinear;  ///< ratios decay monotonically toward 0 at the horizon
};

/// Indirect utility over endowments in the gauge-norm ball of radius x,
/// using the vertically normalized utility (U(0) = 0). Solved through the
/// Lagrangian of the modular constraint E[U_hat(Z/x)] <= 1.
IndirectUtilityProfile indirect_utility_profile(const FiniteMarket& m,
                                                const UtilitySpec& u,
                                                const std::vector<double>& xs);

struct TwoLambdaBoundReport {
    bool holds;
    double worst_margin;  ///< min over samples of rhs - lhs (>= -1e-9 expected)
    std::vector<double> witness_x;  ///< a violating claim when !holds
    std::size_t n_checked;
};

/// Randomized verification of the two-multiplier bound
///   I_U(X) <= I_V(l1 Y) + I_V(l2 Y) + l1 E[XY] - (l2 - l1) E[X^- Y]
/// over claims X drawn from the endowment-shifted cone.
TwoLambdaBoundReport two_lambda_bound_check(const FiniteMarket& m,
                                            const UtilitySpec& u,
                                            const std::vector<double>& y_tilde,
                                            double lambda1, double lambda2,
                                            std::size_t n_samples = 500,
                                            std::uint64_t seed = 20240901);

/// Arbitrage-free random instance for property tests (rejection sampling).
FiniteMarket make_random_market(std::size_t n_states, std::size_t n_generators,
                                std::uint64_t seed);

}  // namespace duality::market
