#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "duality/orlicz.hpp"

/// The countable market exhibiting a strict duality gap: states n with
/// geometric weights e^{-|n|} (state -1 reweighted to e^{-5}), the two-point
/// claim X, and the zero-conditional-mean shocks Y_k whose modular collapses
/// while their gauge norm does not. Exponential utility throughout. The gap
/// appears between optimizing over the constrained strategies (value
/// -E[e^{-X}]) and over the bipolar closure (value -E[e^{-2X}]).

namespace duality::gap {

struct IndexOutOfTruncation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Symmetric truncation |n| <= N. The untruncated tail mass sits on state 0
/// unrenormalized (kept < e^{-N+1}), so the example's two-point constants
/// stay exact.
class GapMarket {
  public:
    explicit GapMarket(int truncation);

    int truncation() const { return n_; }
    const std::vector<int>& states() const { return states_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t index_of(int state) const;

    std::vector<double> x_claim() const;       ///< X: +1 at n=1, -1 at n=-1
    std::vector<double> y_shock(int k) const;  ///< Y_k(n) = n on |n| >= max(k,2)
    std::vector<double> x_k(int k) const;      ///< X + Y_k

    double expectation(const std::vector<double>& claim) const;

  private:
    int n_;
    std::vector<int> states_;
    std::vector<double> probs_;
};

/// E[e^{-lam X}] with the full constant mass at X = 0 included. (The
/// two-exponential display omits that mass; the argmin lam = 2 and every
/// inequality are unaffected, only absolute levels shift.)
double exponential_moment(const GapMarket& m, double lam);

/// Minimizer of lam -> E[e^{-lam X}]; equals 2 (first-order condition
/// e^{-5} e^lam = e^{-1} e^{-lam}).
double exponential_moment_argmin(const GapMarket& m);

struct Completions {
    std::vector<double> effective;  ///< e^{-X}/E[e^{-X}] per state
    std::vector<double> full;       ///< e^{-2X}/E[e^{-2X}] per state
    double entropy_full;            ///< -ln E[e^{-2X}]
    double corner_value;            ///< E[X e^{-X}] = e^{-2} - e^{-4}
    /// |I_V(e^{-X}) + E[X e^{-X}] + E[e^{-X}]| for V(y) = y ln y - y; zero
    /// algebraically, asserted < 1e-10.
    double identity_residual;
    /// max over |E^Q[X]| and |E^Q[Y_k]|, k <= N, under the full completion;
    /// exactly zero by symmetry.
    double separating_residual;
};

Completions completions(const GapMarket& m);

struct ShockTerm {
    int k;          ///< shock index (values below 2 act as 2)
    double lambda;  ///< coefficient on X_k = X + Y_k
};

struct MechanicsReport {
    double xi_total;                  ///< sum of coefficients
    std::vector<double> xi_by_level;  ///< xi_m = sum of lambdas with k <= m, m = 2..N
    double max_conditional_residual;  ///< E[Y_k | X] residuals; 0 by pairing
    double e_exp_z;                   ///< E[e^{-Z}], Z = sum lambda_i X_{k_i}
    double jensen_mid;                ///< E[e^{-xi_total X}]
    double jensen_rhs;                ///< E[e^{-X}]
    bool jensen_chain_holds;          ///< e_exp_z >= mid >= rhs
    /// E[e^{-Z}] recomputed at truncations 10/20/40 (those admitting the ks).
    std::vector<std::pair<int, double>> growth;
    /// Last two growth entries agree within the geometric tail envelope
    /// e^{-(1-|xi|)N}; necessarily false on the |xi| >= 1 divergence class.
    bool stabilizes;
};

MechanicsReport gap_mechanics(const GapMarket& m, const std::vector<ShockTerm>& coeffs);

struct GapCertificate {
    double u_over_c;        ///< -E[e^{-X}]: optimum over constrained strategies
    double u_over_bipolar;  ///< -E[e^{-2X}]: optimum over the bipolar closure
    bool strict_gap;
    double margin;            ///< u_over_bipolar - u_over_c (~0.0541)
    double lambda_hat_boxed;  ///< argmax of -E[e^{-lam X}] on [-1,1]: 1
    double lambda_hat_free;   ///< unconstrained argmax: 2
    std::size_t sampled_strategies;
    double sampled_best;  ///< best sampled -E[e^{-Z}]; never above u_over_c + 1e-9
};

GapCertificate gap_certificate(const GapMarket& m);

struct Moment15Report {
    /// Minimizer on the truncated lattice; sinks toward the boundary 1.5 as
    /// lattice_terms grows (the untruncated moment blows up past 1.5).
    double lambda_hat;
    double marginal_at_boundary;  ///< E[X e^{-1.5X}] > 0: still improving at the wall
    double lattice_drag;          ///< lattice contribution to that marginal (< 0)
    bool boundary_binding;
};

/// Variant with exponential moments only up to order 1.5: part of the state-0
/// mass moves onto a negative lattice x = -j with weights delta e^{-1.5j}/j^3.
/// Off by default everywhere else; the inequality E[X e^{-1.5X}] > 0 is
/// computed, not assumed.
Moment15Report moment15_variant(int truncation, int lattice_terms = 40,
                                double delta = 1e-3);

/// The untruncated shock Y_k as a countable series paired with the
/// exponential Young function: terms (+-m, e^{-m}) for m >= max(k,2). The
/// tail bound is the exact geometric remainder of sum e^{-m}(e^{|s|m} - 1),
/// +inf for |s| >= 1 where the modular diverges.
orlicz::SeriesRandomVariable y_shock_series(int k);

}  // namespace duality::gap
