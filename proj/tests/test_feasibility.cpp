#include <algorithm>
#include <random>
#include <stdexcept>

#include "apmarket/feasibility.hpp"
#include "apmarket/hetero_solver.hpp"
#include "apmarket/oracle.hpp"
#include "apmarket/solver.hpp"
#include "doctest.h"

using namespace apmarket;

namespace {

Population reference_population() {
    Population pop;
    pop.qualities = {1.0, 2.0};
    pop.counts = {2.0, 2.0};
    pop.eta = 0.5;
    pop.n_aliens = 2.0;
    pop.period = 1.0;
    pop.price_cap = 2.0;
    return pop;
}

Contract reference_contract() {
    Contract c;
    c.items = {{1.0, 0.125}, {2.0, 5.0 / 12.0}};
    c.linus_price = 2.0;
    return c;
}

bool has_constraint(const std::vector<Constraint>& list, const std::string& id,
                    int a, int b) {
    return std::any_of(list.begin(), list.end(), [&](const Constraint& c) {
        return c.id == id && c.type_a == a && c.type_b == b;
    });
}

}  // namespace

TEST_CASE("reference menu is feasible; participation of the low type and the "
          "high type's downward mimicry bind") {
    const Population pop = reference_population();
    const Contract c = reference_contract();

    const FeasibilityReport direct = check_ic_ir(pop, c);
    CHECK(direct.is_feasible);
    CHECK(direct.violated.empty());
    CHECK(direct.critical_type == 1);
    CHECK(has_constraint(direct.binding, "IR", 0, -1));
    CHECK(has_constraint(direct.binding, "IC", 1, 0));

    const FeasibilityReport structural = check_theorem1(pop, c);
    CHECK(structural.is_feasible);
    CHECK(structural.critical_type == 1);
}

TEST_CASE("raising one fee past its bound breaks feasibility in both checkers") {
    const Population pop = reference_population();
    Contract c = reference_contract();
    c.items[1].fee += 0.01;

    const FeasibilityReport direct = check_ic_ir(pop, c);
    CHECK_FALSE(direct.is_feasible);
    // the high type now strictly prefers the low type's item
    CHECK(has_constraint(direct.violated, "IC", 1, 0));
    CHECK_FALSE(check_theorem1(pop, c).is_feasible);
}

TEST_CASE("structural families flag the specific broken condition") {
    const Population pop = reference_population();

    SUBCASE("descending subscriber prices") {
        Contract c;
        c.items = {{2.0, 0.1}, {1.0, 0.2}};
        c.linus_price = 2.0;
        const FeasibilityReport rep = check_theorem1(pop, c);
        CHECK_FALSE(rep.is_feasible);
        CHECK(has_constraint(rep.violated, "price-order(14)", 0, 1));
        CHECK_FALSE(check_ic_ir(pop, c).is_feasible);
    }
    SUBCASE("price outside the box") {
        Contract c = reference_contract();
        c.items[1].price = 2.5;
        const FeasibilityReport rep = check_theorem1(pop, c);
        CHECK_FALSE(rep.is_feasible);
        CHECK(has_constraint(rep.violated, "price-box(14)", 1, -1));
    }
    SUBCASE("non-prefix opt-out set") {
        Contract c;
        c.items = {{1.0, 0.1}, ContractItem{}};
        c.linus_price = 2.0;
        const FeasibilityReport rep = check_theorem1(pop, c);
        CHECK_FALSE(rep.is_feasible);
        CHECK(has_constraint(rep.violated, "partition(13)", -1, -1));
    }
    SUBCASE("fee below a non-subscriber's mimicry value") {
        Contract c;
        c.items = {ContractItem{}, {2.0, 0.05}};  // type 2 nearly free
        c.linus_price = 2.0;
        const FeasibilityReport rep = check_theorem1(pop, c);
        CHECK_FALSE(rep.is_feasible);
        CHECK(has_constraint(rep.violated, "fee-lower(15)", 1, 0));
        CHECK_FALSE(check_ic_ir(pop, c).is_feasible);
    }
    SUBCASE("fee above the subscriber's participation bound") {
        Contract c = reference_contract();
        c.items[0].fee = 1.0;
        const FeasibilityReport rep = check_theorem1(pop, c);
        CHECK_FALSE(rep.is_feasible);
        CHECK(has_constraint(rep.violated, "fee-upper(16)", 0, -1));
    }
}

TEST_CASE("equal prices with unequal fees cannot be incentive compatible") {
    const Population pop = reference_population();
    Contract c;
    c.items = {{1.5, 0.1}, {1.5, 0.3}};
    c.linus_price = 2.0;
    CHECK_FALSE(check_ic_ir(pop, c).is_feasible);
    CHECK_FALSE(check_theorem1(pop, c).is_feasible);
    CHECK_THROWS_AS(structural_lemmas_audit(pop, c), std::invalid_argument);
}

TEST_CASE("direct enumeration and the structural families agree on random "
          "instances and contracts") {
    std::mt19937_64 rng(20240817);
    int feasible_seen = 0;
    int infeasible_seen = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int k = 1 + static_cast<int>(rng() % 4);
        const Population pop = random_population(rng, k);
        Contract c = random_feasible_contract(pop, rng);
        if (trial % 2 == 1) c = perturb_contract(pop, c, rng);

        const bool direct = check_ic_ir(pop, c).is_feasible;
        const bool structural = check_theorem1(pop, c).is_feasible;
        REQUIRE_MESSAGE(direct == structural, "verdicts diverge on trial ", trial);
        (direct ? feasible_seen : infeasible_seen) += 1;
    }
    // the sample must exercise both verdicts to mean anything
    CHECK(feasible_seen > 50);
    CHECK(infeasible_seen > 50);
}

TEST_CASE("structural audit passes feasible menus and reports each implication") {
    const Population pop = reference_population();
    const auto verdicts = structural_lemmas_audit(pop, reference_contract());
    CHECK(verdicts.size() >= 3);
    for (const LemmaVerdict& v : verdicts) CHECK_MESSAGE(v.holds, v.lemma, ": ", v.detail);
}

// --- heterogeneous -------------------------------------------------------

namespace {

HeteroPopulation small_hetero() {
    HeteroPopulation h;
    h.qualities = {1.0, 2.0};
    h.etas = {0.4, 0.6};
    h.counts = {{2.0, 2.0}, {2.0, 2.0}};
    h.n_aliens = 4.0;
    h.period = 1.0;
    h.price_cap = 2.0;
    return h;
}

}  // namespace

TEST_CASE("heterogeneous feasibility: solver output passes both checkers") {
    const HeteroPopulation h = small_hetero();
    const HeteroSolveReport rep = hetero_solve(h, 1e-4);

    const HeteroFeasibilityReport direct = hetero_check_ic_ir(h, rep.contract);
    CHECK(direct.is_feasible);
    const HeteroFeasibilityReport structural = check_theorem2_hetero(h, rep.contract);
    CHECK(structural.is_feasible);
    if (direct.critical_vector)
        CHECK(*direct.critical_vector == rep.m_star);

    CHECK_NOTHROW(hetero_structural_lemmas_audit(h, rep.contract));
}

TEST_CASE("heterogeneous checkers agree with the single-level ones when L = 1") {
    std::mt19937_64 rng(5150);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = 1 + static_cast<int>(rng() % 3);
        HeteroPopulation h = random_hetero_population(rng, k, 1);
        const Population pop = collapse_single_mobility(h);

        Contract c = random_feasible_contract(pop, rng);
        if (trial % 2 == 1) c = perturb_contract(pop, c, rng);
        HeteroContract hc;
        hc.items.assign(k, std::vector<ContractItem>(1));
        for (int i = 0; i < k; ++i) hc.items[i][0] = c.items[i];
        hc.linus_price = c.linus_price;

        CHECK(hetero_check_ic_ir(h, hc).is_feasible == check_ic_ir(pop, c).is_feasible);
        CHECK(check_theorem2_hetero(h, hc).is_feasible ==
              check_theorem1(pop, c).is_feasible);
    }
}

TEST_CASE("heterogeneous direct enumeration and structural families agree on "
          "random instances") {
    std::mt19937_64 rng(777001);
    int feasible_seen = 0;
    int infeasible_seen = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const int k = 1 + static_cast<int>(rng() % 3);
        const int l = 1 + static_cast<int>(rng() % 2);
        const HeteroPopulation h = random_hetero_population(rng, k, l);
        HeteroContract hc = random_feasible_hetero_contract(h, rng);
        if (trial % 2 == 1) hc = perturb_hetero_contract(h, hc, rng);

        const bool direct = hetero_check_ic_ir(h, hc).is_feasible;
        const bool structural = check_theorem2_hetero(h, hc).is_feasible;
        REQUIRE_MESSAGE(direct == structural, "verdicts diverge on trial ", trial);
        (direct ? feasible_seen : infeasible_seen) += 1;
    }
    CHECK(feasible_seen > 20);
    CHECK(infeasible_seen > 20);
}

TEST_CASE("heterogeneous structural families flag violations") {
    const HeteroPopulation h = small_hetero();

    SUBCASE("non-monotone critical vector") {
        // low-eta column fully subscribed, high-eta column only from row 2:
        // the per-column thresholds (1, 2) increase, which is disallowed
        HeteroContract flipped;
        flipped.items.assign(2, std::vector<ContractItem>(2));
        flipped.items[0][0] = {0.5, 0.05};
        flipped.items[1][0] = {1.0, 0.1};
        flipped.items[1][1] = {1.0, 0.1};
        flipped.linus_price = 2.0;
        const HeteroFeasibilityReport rep = check_theorem2_hetero(h, flipped);
        CHECK_FALSE(rep.is_feasible);
        const bool flagged = std::any_of(
            rep.violated.begin(), rep.violated.end(),
            [](const HeteroConstraint& v) { return v.id.find("critical") != std::string::npos; });
        CHECK(flagged);
    }
    SUBCASE("descending prices along the subscriber chain") {
        HeteroContract hc;
        hc.items.assign(2, std::vector<ContractItem>(2));
        hc.items[1][0] = {1.5, 0.1};
        hc.items[1][1] = {1.0, 0.1};
        hc.linus_price = 2.0;
        CHECK_FALSE(check_theorem2_hetero(h, hc).is_feasible);
        CHECK_FALSE(hetero_check_ic_ir(h, hc).is_feasible);
    }
}
