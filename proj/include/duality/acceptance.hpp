#pragma once

#include <ostream>
#include <string>
#include <vector>

/// End-to-end verification battery: ten numbered criteria covering the
/// cumulant machinery, the corner example and its dual sequence, the
/// duality-gap market, randomized primal/dual agreement, complete-market
/// closed forms, arbitrage detection, the grid conjugation oracles and the
/// Orlicz suite. Each criterion prints one PASS/FAIL line (plus indented
/// sub-checks) to `out`; wall-clock timings go to `timing` so stdout stays
/// byte-identical across runs.

namespace duality {

struct CriterionResult {
    int index;
    std::string name;
    bool passed;
    bool within_budget;                 ///< wall clock under the stated budget
    std::vector<std::string> details;   ///< sub-check lines, already formatted
    double seconds;
};

struct AcceptanceReport {
    std::vector<CriterionResult> criteria;
    bool all_passed;
    std::string first_failure;  ///< empty when all_passed
};

AcceptanceReport run_acceptance(std::ostream& out, std::ostream& timing);

}  // namespace duality
