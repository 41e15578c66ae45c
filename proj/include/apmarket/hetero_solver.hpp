#pragma once

// Optimal contract under heterogeneous mobility (K quality types x L
// mobility levels): chain-ordered separable objective, closed-form fee
// recursion, and the monotone critical-type-vector search. The price
// optimization reuses the homogeneous dual/dynamic machinery over the
// linearized chain.

#include <vector>

#include "apmarket/market.hpp"
#include "apmarket/solver.hpp"

namespace apmarket {

inline constexpr long kHeteroVectorCap = 1000000;

struct ChainCell {
    int k = 0;  // 0-based quality row
    int l = 0;  // 0-based mobility column
};

struct HeteroObjective {
    std::vector<int> critical_vector;  // 1-based m_l, nonincreasing
    std::vector<ChainCell> chain;      // Bill cells, ascending by (k, l)
    // Chain decomposition: sum of terms minus roaming_constant equals the
    // fee profit when only the chain anchor's participation bound binds
    // (always true with a single mobility level); otherwise it is an upper
    // bound on the achievable fee profit at the given prices.
    std::vector<ScalarTerm> terms;
    // Simplified variant dropping the Bills' roaming cross-payments.
    std::vector<ScalarTerm> naive_terms;
    std::vector<double> omega;  // per mobility level
    double linus_profit = 0.0;  // at the chosen p0
    double roaming_constant = 0.0;
};

// All nonincreasing vectors in {1..K+1}^L, lexicographically ascending.
// Throws std::length_error when the count exceeds `cap`.
std::vector<std::vector<int>> enumerate_critical_vectors(int k_types, int levels,
                                                         long cap = kHeteroVectorCap);

// Bill cells of a (nonincreasing) critical vector in chain order.
std::vector<ChainCell> bill_chain(int k_types, const std::vector<int>& m);

HeteroObjective hetero_build_objective(const HeteroPopulation& pop,
                                       const std::vector<int>& m, double p0);

// Revenue-maximal fees given a chain-nondecreasing price matrix (only Bill
// cells are read): every cell starts at its participation bound and the
// pairwise mimicry bounds are relaxed to a fixpoint. Coincides with the
// anchor-plus-chain-recursion closed form whenever that recursion is
// feasible; then the anchor cell's IR binds exactly.
std::vector<std::vector<double>> hetero_optimal_fees(
    const HeteroPopulation& pop, const std::vector<int>& m,
    const std::vector<std::vector<double>>& prices, double p0);

struct HeteroSolveReport {
    HeteroContract contract;
    double exact_profit = 0.0;
    double decomposed_profit = 0.0;
    double dual_upper_bound = 0.0;
    double dynamic_lower_bound = 0.0;
    std::vector<int> m_star;  // 1-based per mobility level
    long iterations = 0;
    bool dual_converged = true;
    std::vector<std::vector<double>> per_type_payoffs;  // K x L
    double decomposition_gap = 0.0;
};

HeteroSolveReport hetero_solve_given_m(const HeteroPopulation& pop,
                                       const std::vector<int>& m,
                                       double epsilon = kDefaultEpsilon);

// Enumerates every monotone critical vector; ties go to the
// lexicographically smallest vector.
HeteroSolveReport hetero_solve(const HeteroPopulation& pop,
                               double epsilon = kDefaultEpsilon,
                               long vector_cap = kHeteroVectorCap);

}  // namespace apmarket
