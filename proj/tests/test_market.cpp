#include <cmath>
#include <stdexcept>

#include "apmarket/market.hpp"
#include "doctest.h"

using namespace apmarket;

namespace {

// Reference instance used throughout the tests: two quality types with two
// APOs each, half-time mobility, two aliens, unit period, price cap 2.
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

// The revenue-maximal all-subscriber menu for the reference instance.
Contract reference_contract() {
    Contract c;
    c.items = {{1.0, 0.125}, {2.0, 5.0 / 12.0}};
    c.linus_price = 2.0;
    return c;
}

Contract all_linus_contract(const Population& pop) {
    Contract c;
    c.items.assign(pop.type_count(), ContractItem{});
    c.linus_price = pop.price_cap;
    return c;
}

double bad_demand(double theta, double price, double period) {
    return period * theta / ((1.0 + price) * (1.0 + price));
}

}  // namespace

TEST_CASE("demand is the saturating hyperbola and revenue its price multiple") {
    CHECK(demand(1.0, 1.0, 1.0) == doctest::Approx(0.5));
    CHECK(demand(2.0, 2.0, 1.0) == doctest::Approx(0.5));
    CHECK(demand(3.0, 0.0, 2.0) == doctest::Approx(2.0));  // full period at price 0
    CHECK(revenue(1.0, 1.0, 1.0) == doctest::Approx(0.5));
    CHECK(revenue(2.0, 2.0, 1.0) == doctest::Approx(1.0));
    CHECK(revenue(5.0, 3.0, 2.0) == doctest::Approx(2.0 * 3.0 * 5.0 / 8.0));

    // strictly increasing in price, strictly increasing in quality
    CHECK(revenue(2.0, 1.5, 1.0) > revenue(2.0, 1.0, 1.0));
    CHECK(revenue(3.0, 1.0, 1.0) > revenue(2.0, 1.0, 1.0));

    CHECK_THROWS_AS(demand(0.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(demand(-1.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(demand(1.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("demand assumption probe accepts the default and rejects a curve "
          "with non-monotone revenue") {
    const std::vector<double> thetas = {1.0, 2.0, 5.0};
    CHECK(check_demand_assumptions(&demand, thetas, 5.0, 1.0));
    // price * bad_demand peaks at price 1 and then falls
    CHECK_FALSE(check_demand_assumptions(&bad_demand, thetas, 5.0, 1.0));
}

TEST_CASE("population validation rejects broken invariants") {
    Population pop = reference_population();
    CHECK_NOTHROW(pop.validate());
    CHECK(pop.total_apos() == doctest::Approx(4.0));
    CHECK(pop.alien_ratio() == doctest::Approx(0.5));
    CHECK(pop.g(0, 1.0) == doctest::Approx(0.5));
    CHECK(pop.g(1, 2.0) == doctest::Approx(1.0));

    SUBCASE("qualities must strictly increase") {
        pop.qualities = {2.0, 1.0};
        CHECK_THROWS_AS(pop.validate(), std::invalid_argument);
        pop.qualities = {1.0, 1.0};
        CHECK_THROWS_AS(pop.validate(), std::invalid_argument);
    }
    SUBCASE("eta must lie in [0, 1]") {
        pop.eta = 1.5;
        CHECK_THROWS_AS(pop.validate(), std::invalid_argument);
        pop.eta = -0.1;
        CHECK_THROWS_AS(pop.validate(), std::invalid_argument);
    }
    SUBCASE("counts must be at least one APO per type") {
        pop.counts = {2.0, 0.5};
        CHECK_THROWS_AS(pop.validate(), std::invalid_argument);
    }
    SUBCASE("price cap and period must be positive") {
        pop.price_cap = 0.0;
        CHECK_THROWS_AS(pop.validate(), std::invalid_argument);
        pop = reference_population();
        pop.period = -1.0;
        CHECK_THROWS_AS(pop.validate(), std::invalid_argument);
    }
    SUBCASE("aliens may be zero but not negative") {
        pop.n_aliens = 0.0;
        CHECK_NOTHROW(pop.validate());
        pop.n_aliens = -1.0;
        CHECK_THROWS_AS(pop.validate(), std::invalid_argument);
    }
}

TEST_CASE("contract partition helpers") {
    const Population pop = reference_population();
    Contract c = reference_contract();

    CHECK(c.is_bill(0));
    CHECK(c.is_bill(1));
    CHECK(c.bill_types() == std::vector<int>{0, 1});
    CHECK(c.linus_types().empty());
    CHECK(c.bill_count(pop) == doctest::Approx(4.0));
    CHECK(c.critical_type() == 1);

    c.items[0] = ContractItem{};  // type 1 opts out
    CHECK(c.critical_type() == 2);
    CHECK(c.bill_count(pop) == doctest::Approx(2.0));

    CHECK(all_linus_contract(pop).critical_type() == 3);

    // non-subscribers must form a prefix in quality
    Contract hole;
    hole.items = {{1.0, 0.1}, ContractItem{}};
    hole.linus_price = 2.0;
    CHECK_FALSE(hole.critical_type().has_value());
}

TEST_CASE("market statistics on the reference all-subscriber menu") {
    const Population pop = reference_population();
    const Contract c = reference_contract();
    const MarketStats s = market_stats(pop, c);

    CHECK(s.omega == doctest::Approx(0.875).epsilon(1e-12));
    CHECK(s.mu == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.nu == doctest::Approx(0.375).epsilon(1e-12));
    REQUIRE(s.beta.size() == 2);
    CHECK(s.beta[0] == doctest::Approx(0.3125).epsilon(1e-12));
    CHECK(s.beta[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("payoffs on the reference menu: low type at zero, high type keeps "
          "an information rent") {
    const Population pop = reference_population();
    const Contract c = reference_contract();
    const MarketStats s = market_stats(pop, c);

    CHECK(bill_payoff(pop, c, s, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bill_payoff(pop, c, s, 1) == doctest::Approx(5.0 / 24.0).epsilon(1e-12));
    CHECK(linus_payoff() == 0.0);

    // evaluating one's own item recovers the designed payoff
    CHECK(cross_payoff(pop, c, s, 0, c.items[0]) ==
          doctest::Approx(bill_payoff(pop, c, s, 0)));
    CHECK(cross_payoff(pop, c, s, 1, c.items[1]) ==
          doctest::Approx(bill_payoff(pop, c, s, 1)));
    // the high type is exactly indifferent to the low type's item
    CHECK(cross_payoff(pop, c, s, 1, c.items[0]) ==
          doctest::Approx(bill_payoff(pop, c, s, 1)).epsilon(1e-12));
    // the low type strictly dislikes the high type's item
    CHECK(cross_payoff(pop, c, s, 0, c.items[1]) < bill_payoff(pop, c, s, 0));

    CHECK_THROWS_AS(bill_payoff(pop, all_linus_contract(pop),
                                market_stats(pop, all_linus_contract(pop)), 0),
                    std::invalid_argument);
}

TEST_CASE("operator profit: fee collection vs direct sales") {
    const Population pop = reference_population();
    CHECK(operator_profit(pop, reference_contract()) ==
          doctest::Approx(13.0 / 12.0).epsilon(1e-12));
    CHECK(operator_profit(pop, all_linus_contract(pop)) ==
          doctest::Approx(5.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("single-mobility-level instances collapse to the homogeneous model") {
    HeteroPopulation h;
    h.qualities = {1.0, 2.0};
    h.etas = {0.5};
    h.counts = {{2.0}, {2.0}};
    h.n_aliens = 2.0;
    h.period = 1.0;
    h.price_cap = 2.0;
    h.validate();

    const Population pop = collapse_single_mobility(h);
    CHECK(pop.qualities == std::vector<double>{1.0, 2.0});
    CHECK(pop.counts == std::vector<double>{2.0, 2.0});
    CHECK(pop.eta == doctest::Approx(0.5));
    CHECK(pop.n_aliens == doctest::Approx(2.0));

    HeteroContract hc;
    hc.items = {{{1.0, 0.125}}, {{2.0, 5.0 / 12.0}}};
    hc.linus_price = 2.0;

    const Contract c = reference_contract();
    const MarketStats s = market_stats(pop, c);
    const HeteroStats hs = hetero_stats(h, hc);

    REQUIRE(hs.omega.size() == 1);
    CHECK(hs.omega[0] == doctest::Approx(s.omega).epsilon(1e-12));
    CHECK(hs.mu == doctest::Approx(s.mu).epsilon(1e-12));
    // the flat payment base carries no travel factor; scale it back
    CHECK((1.0 - h.etas[0]) / h.total_apos() * hs.nu ==
          doctest::Approx(s.nu).epsilon(1e-12));
    CHECK(hs.beta[0][0] == doctest::Approx(s.beta[0]).epsilon(1e-12));
    CHECK(hs.beta[1][0] == doctest::Approx(s.beta[1]).epsilon(1e-12));

    CHECK(hetero_bill_payoff(h, hc, hs, 0, 0) ==
          doctest::Approx(bill_payoff(pop, c, s, 0)).epsilon(1e-12));
    CHECK(hetero_bill_payoff(h, hc, hs, 1, 0) ==
          doctest::Approx(bill_payoff(pop, c, s, 1)).epsilon(1e-12));
    CHECK(hetero_operator_profit(h, hc) ==
          doctest::Approx(operator_profit(pop, c)).epsilon(1e-12));
    CHECK(hetero_cross_payoff(h, hc, hs, 0, 0, hc.items[1][0]) ==
          doctest::Approx(cross_payoff(pop, c, s, 0, c.items[1])).epsilon(1e-12));
}

TEST_CASE("heterogeneous statistics: revenue share rises with the stay-home "
          "probability") {
    HeteroPopulation h;
    h.qualities = {1.0, 2.0};
    h.etas = {0.2, 0.8};
    h.counts = {{3.0, 4.0}, {5.0, 6.0}};
    h.n_aliens = 9.0;
    h.period = 1.0;
    h.price_cap = 2.0;
    h.validate();

    HeteroContract hc;
    hc.items.assign(2, std::vector<ContractItem>(2, ContractItem{}));
    hc.items[1][0] = {1.0, 0.2};
    hc.items[1][1] = {1.5, 0.3};
    hc.linus_price = 2.0;
    REQUIRE(hc.critical_vector().has_value());
    CHECK(*hc.critical_vector() == std::vector<int>{2, 2});

    const HeteroStats hs = hetero_stats(h, hc);
    CHECK(hs.omega[0] < hs.omega[1]);
    CHECK(hs.mu == doctest::Approx(hs.omega[0] + (1.0 - h.etas[0]) / 18.0));
    CHECK(hs.mu == doctest::Approx(hs.omega[1] + (1.0 - h.etas[1]) / 18.0));
    // non-subscriber cells carry no roaming-payment entry
    CHECK(hs.beta[0][0] == 0.0);
    CHECK(hs.beta[1][0] > 0.0);

    SUBCASE("validation mirrors the homogeneous rules") {
        HeteroPopulation bad = h;
        bad.etas = {0.8, 0.2};
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = h;
        bad.counts[0][0] = -1.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = h;
        bad.qualities = {2.0, 2.0};
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }

    SUBCASE("per-column prefix detection") {
        HeteroContract hole = hc;
        // column 0 with the low quality in and the high quality out
        hole.items[0][0] = {0.5, 0.1};
        hole.items[1][0] = ContractItem{};
        CHECK_FALSE(hole.critical_vector().has_value());
    }
}
