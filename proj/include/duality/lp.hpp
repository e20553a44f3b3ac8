#pragma once

#include <stdexcept>
#include <vector>

/// Small dense linear programming: maximize c'x subject to
/// A_ub x <= b_ub, A_eq x = b_eq, x >= 0.
/// Two-phase simplex with Bland's rule (terminating on degenerate problems).
/// Problem sizes here are tiny (tens of variables), so no sparsity, no scaling.

namespace duality {

enum class LpStatus { optimal, unbounded, infeasible };

struct LpResult {
    LpStatus status;
    double value = 0.0;
    std::vector<double> x;    ///< optimal point (status == optimal)
    std::vector<double> ray;  ///< feasible improving ray (status == unbounded):
                              ///< x + t*ray feasible for all t >= 0, c'ray > 0
};

LpResult solve_lp(const std::vector<double>& c,
                  const std::vector<std::vector<double>>& A_ub,
                  const std::vector<double>& b_ub,
                  const std::vector<std::vector<double>>& A_eq,
                  const std::vector<double>& b_eq);

/// Convenience wrapper handling free variables by sign-splitting.
/// Variables are added first, then constraints, then maximize().
class LpProblem {
  public:
    /// Returns the variable index used in constraint/objective coefficient maps.
    int add_var(bool nonnegative);

    void add_le(const std::vector<std::pair<int, double>>& coeffs, double rhs);
    void add_ge(const std::vector<std::pair<int, double>>& coeffs, double rhs);
    void add_eq(const std::vector<std::pair<int, double>>& coeffs, double rhs);

    /// Maximizes sum obj[i]*x_i. Solution/ray in LpResult are in user variables.
    LpResult maximize(const std::vector<std::pair<int, double>>& obj) const;

  private:
    struct Row {
        std::vector<std::pair<int, double>> coeffs;
        double rhs;
        bool equality;
    };
    std::vector<bool> nonneg_;
    std::vector<Row> rows_;
};

}  // namespace duality
