#pragma once

// Brute-force ground truth at desk scale: grid search over structured
// contract menus, a best-response equilibrium check, and random instance /
// contract generators for property tests.

#include <random>
#include <utility>
#include <vector>

#include "apmarket/feasibility.hpp"
#include "apmarket/market.hpp"

namespace apmarket {

struct GridSpec {
    int points = 101;            // G >= 2 points per price axis
    bool includes_bounds = true; // grid = { i*p_max/(G-1) : i = 0..G-1 }
};

struct GridSearchResult {
    Contract contract;
    double profit = 0.0;
    int m = 1;                          // 1-based critical type of the winner
    std::vector<double> per_m_profit;   // best profit per m in {1..K+1}
};

// Enumerates every critical type and every nondecreasing Bill price tuple on
// the grid; fees come from the closed-form recursion, p0 = p_max. Ties go to
// the smaller m, then the lexicographically smaller price tuple.
// Throws std::invalid_argument when K > 4 or G < 2.
GridSearchResult grid_search_contract(const Population& pop, const GridSpec& grid);

struct HeteroGridSearchResult {
    HeteroContract contract;
    double profit = 0.0;
    std::vector<int> m;  // 1-based winning critical vector
    std::vector<std::pair<std::vector<int>, double>> per_vector_profit;
};

// Same idea over monotone critical vectors and chain-monotone price tuples.
// Throws std::invalid_argument when K*L > 6 or G < 2.
HeteroGridSearchResult hetero_grid_search(const HeteroPopulation& pop,
                                          const GridSpec& grid);

// True iff every type's payoff-maximizing item (over all Bill items, the
// Linus sentinel and the rationality floor 0) weakly includes its designed
// choice.
bool best_response_check(const Population& pop, const Contract& c,
                         double tolerance = kFeasibilityTol);

bool hetero_best_response_check(const HeteroPopulation& pop, const HeteroContract& c,
                                double tolerance = kFeasibilityTol);

// --- random instances and contracts -------------------------------------
// Qualities sorted-uniform in [0.5, 20], counts uniform integers in {1..50},
// eta uniform in [0.1, 0.9], alien ratio drawn from {0, 0.05, 0.5, 5},
// p_max = 5, T = 1.

Population random_population(std::mt19937_64& rng, int k_types);

HeteroPopulation random_hetero_population(std::mt19937_64& rng, int k_types,
                                          int levels);

// Random critical type + sorted uniform prices + closed-form fees,
// rejection-sampled until the menu passes the full IC/IR check (cheap price
// vectors can otherwise tempt a near-threshold non-subscriber).
Contract random_feasible_contract(const Population& pop, std::mt19937_64& rng);

// Adds uniform noise in [-magnitude, magnitude] to Bill prices/fees (prices
// clamped to the box) and occasionally toggles one type's membership.
Contract perturb_contract(const Population& pop, Contract c, std::mt19937_64& rng,
                          double magnitude = 0.05);

HeteroContract random_feasible_hetero_contract(const HeteroPopulation& pop,
                                               std::mt19937_64& rng);

HeteroContract perturb_hetero_contract(const HeteroPopulation& pop, HeteroContract c,
                                       std::mt19937_64& rng, double magnitude = 0.05);

}  // namespace apmarket
