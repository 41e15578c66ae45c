#include "apmarket/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apmarket/feasibility.hpp"
#include "apmarket/hetero_solver.hpp"
#include "apmarket/solver.hpp"

namespace apmarket {

namespace {

std::vector<double> grid_values(const GridSpec& grid, double price_cap) {
    if (grid.points < 2) throw std::invalid_argument("grid: needs at least 2 points");
    if (!grid.includes_bounds)
        throw std::invalid_argument("grid: bounds must be included");
    std::vector<double> v(grid.points);
    for (int i = 0; i < grid.points; ++i)
        v[i] = price_cap * i / (grid.points - 1);
    return v;
}

// Odometer step over nondecreasing index tuples; false once exhausted.
bool next_nondecreasing(std::vector<int>& idx, int top) {
    for (std::size_t i = idx.size(); i-- > 0;) {
        if (idx[i] < top) {
            const int v = idx[i] + 1;
            for (std::size_t j = i; j < idx.size(); ++j) idx[j] = v;
            return true;
        }
    }
    return false;
}

}  // namespace

GridSearchResult grid_search_contract(const Population& pop, const GridSpec& grid) {
    pop.validate();
    const int kk = pop.type_count();
    if (kk > 4)
        throw std::invalid_argument("grid_search_contract: K must be <= 4");
    const std::vector<double> gv = grid_values(grid, pop.price_cap);
    const double p0 = pop.price_cap;

    GridSearchResult best;
    best.per_m_profit.assign(kk + 1, 0.0);
    bool have = false;
    for (int m = 1; m <= kk + 1; ++m) {
        const int nb = kk - m + 1;
        double best_m = 0.0;
        bool have_m = false;
        std::vector<int> idx(nb, 0);
        do {
            std::vector<double> prices(nb);
            for (int i = 0; i < nb; ++i) prices[i] = gv[idx[i]];
            const std::vector<double> fees = optimal_fees(pop, m, prices, p0);
            Contract c;
            c.items.assign(kk, ContractItem{});
            c.linus_price = p0;
            for (int i = 0; i < nb; ++i) c.items[m - 1 + i] = {prices[i], fees[i]};
            // a zero-price zero-fee item collapses into the opt-out sentinel;
            // such tuples realize a different partition, enumerated elsewhere
            if (c.critical_type() != m) continue;
            const double profit = operator_profit(pop, c);
            if (!have_m || profit > best_m) {
                best_m = profit;
                have_m = true;
            }
            if (!have || profit > best.profit) {
                best.contract = c;
                best.profit = profit;
                best.m = m;
                have = true;
            }
        } while (nb > 0 && next_nondecreasing(idx, grid.points - 1));
        best.per_m_profit[m - 1] = best_m;
    }
    return best;
}

HeteroGridSearchResult hetero_grid_search(const HeteroPopulation& pop,
                                          const GridSpec& grid) {
    pop.validate();
    const int kk = pop.type_count();
    const int ll = pop.mobility_count();
    if (kk * ll > 6)
        throw std::invalid_argument("hetero_grid_search: K*L must be <= 6");
    const std::vector<double> gv = grid_values(grid, pop.price_cap);
    const double p0 = pop.price_cap;

    HeteroGridSearchResult best;
    bool have = false;
    for (const std::vector<int>& m : enumerate_critical_vectors(kk, ll)) {
        const std::vector<ChainCell> chain = bill_chain(kk, m);
        const std::size_t nc = chain.size();
        double best_m = 0.0;
        bool have_m = false;
        std::vector<int> idx(nc, 0);
        do {
            std::vector<std::vector<double>> prices(kk, std::vector<double>(ll, 0.0));
            for (std::size_t t = 0; t < nc; ++t)
                prices[chain[t].k][chain[t].l] = gv[idx[t]];
            const std::vector<std::vector<double>> fees =
                hetero_optimal_fees(pop, m, prices, p0);
            HeteroContract c;
            c.items.assign(kk, std::vector<ContractItem>(ll, ContractItem{}));
            c.linus_price = p0;
            for (const ChainCell& cell : chain)
                c.items[cell.k][cell.l] = {prices[cell.k][cell.l], fees[cell.k][cell.l]};
            // a zero-price zero-fee item collapses into the opt-out sentinel;
            // such tuples realize a different partition, enumerated elsewhere
            if (c.critical_vector() != m) continue;
            // Unlike the single-mobility case, the fee closure can land below
            // a non-subscriber's mimicry bound; such price tuples admit no
            // feasible fees at all and are excluded from the search.
            if (!hetero_check_ic_ir(pop, c).is_feasible) continue;
            const double profit = hetero_operator_profit(pop, c);
            if (!have_m || profit > best_m) {
                best_m = profit;
                have_m = true;
            }
            if (!have || profit > best.profit) {
                best.contract = c;
                best.profit = profit;
                best.m = m;
                have = true;
            }
        } while (nc > 0 && next_nondecreasing(idx, grid.points - 1));
        best.per_vector_profit.emplace_back(m, best_m);
    }
    return best;
}

bool best_response_check(const Population& pop, const Contract& c, double tolerance) {
    const MarketStats stats = market_stats(pop, c);
    for (int k = 0; k < pop.type_count(); ++k) {
        double designed = c.is_bill(k) ? bill_payoff(pop, c, stats, k) : linus_payoff();
        double top = linus_payoff();  // sentinel doubles as the rationality floor
        for (int j = 0; j < pop.type_count(); ++j)
            if (c.is_bill(j))
                top = std::max(top, cross_payoff(pop, c, stats, k, c.items[j]));
        if (designed + tolerance < top) return false;
    }
    return true;
}

bool hetero_best_response_check(const HeteroPopulation& pop, const HeteroContract& c,
                                double tolerance) {
    const HeteroStats stats = hetero_stats(pop, c);
    const int kk = pop.type_count();
    const int ll = pop.mobility_count();
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l) {
            double designed =
                c.is_bill(k, l) ? hetero_bill_payoff(pop, c, stats, k, l) : linus_payoff();
            double top = linus_payoff();
            for (int i = 0; i < kk; ++i)
                for (int j = 0; j < ll; ++j)
                    if (c.is_bill(i, j))
                        top = std::max(
                            top, hetero_cross_payoff(pop, c, stats, k, l, c.items[i][j]));
            if (designed + tolerance < top) return false;
        }
    return true;
}

// --- random instances and contracts -------------------------------------

namespace {

constexpr double kAlienRatios[] = {0.0, 0.05, 0.5, 5.0};

std::vector<double> sorted_qualities(std::mt19937_64& rng, int k_types) {
    std::uniform_real_distribution<double> theta(0.5, 20.0);
    std::vector<double> q(k_types);
    for (double& x : q) x = theta(rng);
    std::sort(q.begin(), q.end());
    // enforce strict increase in the (measure-zero) tie case
    for (int k = 1; k < k_types; ++k)
        if (q[k] <= q[k - 1]) q[k] = q[k - 1] + 1e-6;
    return q;
}

}  // namespace

Population random_population(std::mt19937_64& rng, int k_types) {
    std::uniform_int_distribution<int> count(1, 50);
    std::uniform_real_distribution<double> eta(0.1, 0.9);
    std::uniform_int_distribution<int> ratio(0, 3);

    Population pop;
    pop.qualities = sorted_qualities(rng, k_types);
    pop.counts.resize(k_types);
    for (double& c : pop.counts) c = count(rng);
    pop.eta = eta(rng);
    pop.period = 1.0;
    pop.price_cap = 5.0;
    pop.n_aliens = kAlienRatios[ratio(rng)] * pop.total_apos();
    return pop;
}

HeteroPopulation random_hetero_population(std::mt19937_64& rng, int k_types,
                                          int levels) {
    std::uniform_int_distribution<int> count(1, 50);
    std::uniform_real_distribution<double> eta(0.1, 0.9);
    std::uniform_int_distribution<int> ratio(0, 3);

    HeteroPopulation pop;
    pop.qualities = sorted_qualities(rng, k_types);
    pop.etas.resize(levels);
    for (double& e : pop.etas) e = eta(rng);
    std::sort(pop.etas.begin(), pop.etas.end());
    for (int l = 1; l < levels; ++l)
        if (pop.etas[l] <= pop.etas[l - 1])
            pop.etas[l] = pop.etas[l - 1] + 1e-6;
    pop.counts.assign(k_types, std::vector<double>(levels, 0.0));
    for (auto& row : pop.counts)
        for (double& c : row) c = count(rng);
    pop.period = 1.0;
    pop.price_cap = 5.0;
    pop.n_aliens = kAlienRatios[ratio(rng)] * pop.total_apos();
    return pop;
}

Contract random_feasible_contract(const Population& pop, std::mt19937_64& rng) {
    const int kk = pop.type_count();
    std::uniform_int_distribution<int> pick_m(1, kk + 1);
    std::uniform_real_distribution<double> price(0.0, pop.price_cap);

    // The closed-form fees bind the lowest subscriber's participation and the
    // adjacent mimicry constraints, but a non-subscriber just below the
    // threshold can still profitably grab a cheap high item; rejection-sample
    // until the menu passes the full check. The all-out menu (m = K+1) is
    // always feasible, so this terminates.
    for (;;) {
        const int m = pick_m(rng);
        const int nb = kk - m + 1;
        std::vector<double> prices(nb);
        for (double& p : prices) p = price(rng);
        std::sort(prices.begin(), prices.end());
        const std::vector<double> fees = optimal_fees(pop, m, prices, pop.price_cap);

        Contract c;
        c.items.assign(kk, ContractItem{});
        c.linus_price = pop.price_cap;
        for (int i = 0; i < nb; ++i) c.items[m - 1 + i] = {prices[i], fees[i]};
        if (check_ic_ir(pop, c).is_feasible) return c;
    }
}

Contract perturb_contract(const Population& pop, Contract c, std::mt19937_64& rng,
                          double magnitude) {
    std::uniform_real_distribution<double> noise(-magnitude, magnitude);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, pop.type_count() - 1);
    std::uniform_real_distribution<double> price(0.0, pop.price_cap);

    for (ContractItem& item : c.items)
        if (!item.is_linus()) {
            item.price = std::clamp(item.price + noise(rng), 0.0, pop.price_cap);
            item.fee += noise(rng);
            if (item.is_linus()) item.fee = 1e-9;  // keep it a Bill item
        }
    if (coin(rng) < 0.2) {
        const int k = pick(rng);
        if (c.is_bill(k))
            c.items[k] = ContractItem{};
        else
            c.items[k] = {price(rng), noise(rng) + magnitude};
    }
    return c;
}

HeteroContract random_feasible_hetero_contract(const HeteroPopulation& pop,
                                               std::mt19937_64& rng) {
    const int kk = pop.type_count();
    const int ll = pop.mobility_count();
    std::uniform_int_distribution<int> pick_m(1, kk + 1);
    std::uniform_real_distribution<double> price(0.0, pop.price_cap);

    // Same rejection loop as the single-level generator: the fee closure is
    // revenue-maximal given the prices, but some partitions admit no feasible
    // fees at all. The all-out vector is always feasible.
    for (;;) {
        std::vector<int> m(ll);
        for (int& v : m) v = pick_m(rng);
        std::sort(m.begin(), m.end(), std::greater<int>());

        const std::vector<ChainCell> chain = bill_chain(kk, m);
        std::vector<double> chain_prices(chain.size());
        for (double& p : chain_prices) p = price(rng);
        std::sort(chain_prices.begin(), chain_prices.end());

        std::vector<std::vector<double>> prices(kk, std::vector<double>(ll, 0.0));
        for (std::size_t t = 0; t < chain.size(); ++t)
            prices[chain[t].k][chain[t].l] = chain_prices[t];
        const std::vector<std::vector<double>> fees =
            hetero_optimal_fees(pop, m, prices, pop.price_cap);

        HeteroContract c;
        c.items.assign(kk, std::vector<ContractItem>(ll, ContractItem{}));
        c.linus_price = pop.price_cap;
        for (const ChainCell& cell : chain)
            c.items[cell.k][cell.l] = {prices[cell.k][cell.l], fees[cell.k][cell.l]};
        if (hetero_check_ic_ir(pop, c).is_feasible) return c;
    }
}

HeteroContract perturb_hetero_contract(const HeteroPopulation& pop, HeteroContract c,
                                       std::mt19937_64& rng, double magnitude) {
    std::uniform_real_distribution<double> noise(-magnitude, magnitude);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> pick_k(0, pop.type_count() - 1);
    std::uniform_int_distribution<int> pick_l(0, pop.mobility_count() - 1);
    std::uniform_real_distribution<double> price(0.0, pop.price_cap);

    for (auto& row : c.items)
        for (ContractItem& item : row)
            if (!item.is_linus()) {
                item.price = std::clamp(item.price + noise(rng), 0.0, pop.price_cap);
                item.fee += noise(rng);
                if (item.is_linus()) item.fee = 1e-9;
            }
    if (coin(rng) < 0.2) {
        const int k = pick_k(rng);
        const int l = pick_l(rng);
        if (c.is_bill(k, l))
            c.items[k][l] = ContractItem{};
        else
            c.items[k][l] = {price(rng), noise(rng) + magnitude};
    }
    return c;
}

}  // namespace apmarket
