#pragma once

// Feasibility checks for contracts: direct incentive-compatibility and
// individual-rationality enumeration, the equivalent structural condition
// sets, and structural-lemma audits on feasible contracts.

#include <optional>
#include <string>
#include <vector>

#include "apmarket/market.hpp"

namespace apmarket {

// Constraint slack below -kFeasibilityTol counts as violated; |slack| up to
// kBindingTol counts as binding.
inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kBindingTol = 1e-7;

struct Constraint {
    std::string id;      // e.g. "IR", "IC", "partition", "price-order", ...
    int type_a = -1;     // 0-based primary type index (or -1)
    int type_b = -1;     // 0-based deviation-target / pair index (or -1)
    double slack = 0.0;  // >= 0 means satisfied
};

struct FeasibilityReport {
    bool is_feasible = true;
    std::vector<Constraint> violated;
    std::optional<int> critical_type;  // 1-based m in {1..K+1}
    std::vector<Constraint> binding;
};

// Enumerates every IC comparison (each type against every Bill item and the
// Linus sentinel) and every IR constraint. Violations are ordered by
// ascending type, then target item.
FeasibilityReport check_ic_ir(const Population& pop, const Contract& c,
                              double tolerance = kFeasibilityTol);

// Evaluates the structural condition families (partition prefix, price
// box/ordering, fee lower/upper bounds, pairwise fee sandwich). Agrees with
// check_ic_ir on the verdict for every contract within the price box.
FeasibilityReport check_theorem1(const Population& pop, const Contract& c,
                                 double tolerance = kFeasibilityTol);

struct LemmaVerdict {
    std::string lemma;
    bool holds = true;
    std::string detail;
};

// Asserts the structural implications (price/fee co-monotonicity,
// quality-price monotonicity, Linus-prefix structure) on a contract that
// already passed check_ic_ir. Throws std::invalid_argument otherwise.
std::vector<LemmaVerdict> structural_lemmas_audit(const Population& pop,
                                                  const Contract& c);

// --- heterogeneous ------------------------------------------------------

struct HeteroConstraint {
    std::string id;
    int k_a = -1, l_a = -1;  // 0-based cell
    int k_b = -1, l_b = -1;
    double slack = 0.0;
};

struct HeteroFeasibilityReport {
    bool is_feasible = true;
    std::vector<HeteroConstraint> violated;
    std::optional<std::vector<int>> critical_vector;  // 1-based m_l
    std::vector<HeteroConstraint> binding;
};

// Direct IC/IR enumeration over all K*L types and all items.
HeteroFeasibilityReport hetero_check_ic_ir(const HeteroPopulation& pop,
                                           const HeteroContract& c,
                                           double tolerance = kFeasibilityTol);

// Structural condition families for the K*L model: per-column partition,
// monotone critical vector, price chain, fee bounds and pairwise sandwich.
HeteroFeasibilityReport check_theorem2_hetero(const HeteroPopulation& pop,
                                              const HeteroContract& c,
                                              double tolerance = kFeasibilityTol);

std::vector<LemmaVerdict> hetero_structural_lemmas_audit(
    const HeteroPopulation& pop, const HeteroContract& c);

}  // namespace apmarket
