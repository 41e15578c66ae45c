#include "apmarket/hetero_solver.hpp"

#include <algorithm>
#include <stdexcept>

#include "apmarket/feasibility.hpp"

namespace apmarket {

namespace {

void validate_vector(const HeteroPopulation& pop, const std::vector<int>& m) {
    if (static_cast<int>(m.size()) != pop.mobility_count())
        throw std::invalid_argument("critical vector: needs one entry per mobility level");
    for (std::size_t l = 0; l < m.size(); ++l) {
        if (m[l] < 1 || m[l] > pop.type_count() + 1)
            throw std::invalid_argument("critical vector: entry outside {1..K+1}");
        if (l > 0 && m[l] > m[l - 1])
            throw std::invalid_argument("critical vector: must be nonincreasing");
    }
}

bool nondecreasing(const std::vector<double>& v, double tol = 1e-12) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i] > v[i + 1] + tol) return false;
    return true;
}

}  // namespace

std::vector<std::vector<int>> enumerate_critical_vectors(int k_types, int levels,
                                                         long cap) {
    if (k_types < 1 || levels < 1)
        throw std::invalid_argument("enumerate_critical_vectors: needs K >= 1, L >= 1");
    std::vector<std::vector<int>> out;
    std::vector<int> cur(levels);
    // depth-first with nonincreasing entries yields lexicographic order
    auto rec = [&](auto&& self, int depth, int hi) -> void {
        if (depth == levels) {
            if (static_cast<long>(out.size()) >= cap)
                throw std::length_error("enumerate_critical_vectors: cap exceeded");
            out.push_back(cur);
            return;
        }
        for (int v = 1; v <= hi; ++v) {
            cur[depth] = v;
            self(self, depth + 1, v);
        }
    };
    rec(rec, 0, k_types + 1);
    return out;
}

std::vector<ChainCell> bill_chain(int k_types, const std::vector<int>& m) {
    std::vector<ChainCell> chain;
    for (int k = 0; k < k_types; ++k)
        for (int l = 0; l < static_cast<int>(m.size()); ++l)
            if (k + 1 >= m[l]) chain.push_back({k, l});
    return chain;
}

HeteroObjective hetero_build_objective(const HeteroPopulation& pop,
                                       const std::vector<int>& m, double p0) {
    validate_vector(pop, m);
    const double n = pop.total_apos();
    const int ll = pop.mobility_count();

    HeteroObjective obj;
    obj.critical_vector = m;
    obj.chain = bill_chain(pop.type_count(), m);
    const std::size_t nc = obj.chain.size();
    if (nc == 0)
        throw std::invalid_argument(
            "hetero_build_objective: no subscriber cells under this vector");

    double bill_traffic = 0.0;
    for (const ChainCell& cell : obj.chain)
        bill_traffic += (1.0 - pop.etas[cell.l]) / n * pop.counts[cell.k][cell.l];
    obj.omega.resize(ll);
    for (int l = 0; l < ll; ++l)
        obj.omega[l] = bill_traffic + pop.n_aliens / n - (1.0 - pop.etas[l]) / n;

    // tail[t] = number of Bill APOs at or after chain position t
    std::vector<double> tail(nc + 1, 0.0);
    for (std::size_t t = nc; t-- > 0;)
        tail[t] = tail[t + 1] + pop.counts[obj.chain[t].k][obj.chain[t].l];

    const double anchor_travel =
        nc > 0 ? (1.0 - pop.etas[obj.chain[0].l]) / n : 0.0;
    for (std::size_t t = 0; t < nc; ++t) {
        const ChainCell& cell = obj.chain[t];
        ScalarTerm f;
        f.period = pop.period;
        f.own_theta = pop.qualities[cell.k];
        f.own_coef = obj.omega[cell.l] * tail[t];
        if (t == 0) f.own_coef += anchor_travel * tail[t];
        if (t + 1 < nc) {
            const ChainCell& next = obj.chain[t + 1];
            f.sub_coef = obj.omega[next.l] * tail[t + 1];
            f.sub_theta = pop.qualities[next.k];
        }
        obj.naive_terms.push_back(f);
        // Exact variant: the anchor cell's binding participation fee nets out
        // its roaming spend at every Bill AP; the simplified form drops this.
        f.own_coef -= tail[0] * anchor_travel * pop.counts[cell.k][cell.l];
        obj.terms.push_back(f);
    }

    obj.linus_profit = 0.0;
    obj.roaming_constant = 0.0;
    const double visits = bill_traffic + pop.alien_ratio();
    for (int k = 0; k < pop.type_count(); ++k)
        for (int l = 0; l < ll; ++l)
            if (k + 1 < m[l]) {
                obj.linus_profit += pop.counts[k][l] * visits * pop.g(k, p0);
                obj.roaming_constant +=
                    tail[0] * anchor_travel * pop.counts[k][l] * pop.g(k, p0);
            }
    return obj;
}

std::vector<std::vector<double>> hetero_optimal_fees(
    const HeteroPopulation& pop, const std::vector<int>& m,
    const std::vector<std::vector<double>>& prices, double p0) {
    validate_vector(pop, m);
    const int kk = pop.type_count();
    const int ll = pop.mobility_count();
    if (static_cast<int>(prices.size()) != kk)
        throw std::invalid_argument("hetero_optimal_fees: prices must be K x L");
    for (const auto& row : prices)
        if (static_cast<int>(row.size()) != ll)
            throw std::invalid_argument("hetero_optimal_fees: prices must be K x L");

    const std::vector<ChainCell> chain = bill_chain(kk, m);
    std::vector<std::vector<double>> fees(kk, std::vector<double>(ll, 0.0));
    if (chain.empty()) return fees;

    double prev_price = -1.0;
    for (const ChainCell& cell : chain) {
        const double p = prices[cell.k][cell.l];
        if (p < -1e-12 || p > pop.price_cap + 1e-12)
            throw std::invalid_argument("hetero_optimal_fees: price outside [0, p_max]");
        if (p + 1e-12 < prev_price)
            throw std::invalid_argument(
                "hetero_optimal_fees: prices must be nondecreasing along the chain");
        prev_price = p;
    }

    const double n = pop.total_apos();
    double bill_traffic = 0.0;
    double base = 0.0;  // sum over all APs of N * g at the charged price
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l) {
            if (k + 1 >= m[l]) {
                bill_traffic += (1.0 - pop.etas[l]) / n * pop.counts[k][l];
                base += pop.counts[k][l] * pop.g(k, prices[k][l]);
            } else {
                base += pop.counts[k][l] * pop.g(k, p0);
            }
        }

    // Componentwise-maximal fees: start every cell at its own participation
    // bound and relax the pairwise mimicry bounds
    //   fee[dst] <= fee[src] + omega_dst * (g_dst(p_dst) - g_dst(p_src))
    // to a fixpoint. When only the chain-anchor participation bound binds,
    // this reproduces the along-the-chain recursion (anchor fee equals its
    // revenue share minus roaming spend; each later cell adds its
    // omega-weighted revenue step from the predecessor). With strongly
    // heterogeneous mobility the low-eta cells' participation bounds can
    // re-bind mid-chain, and the closure is required for feasibility.
    const std::size_t nc = chain.size();
    std::vector<double> cell_price(nc), omega_of(nc), bound(nc);
    for (std::size_t t = 0; t < nc; ++t) {
        const ChainCell& cell = chain[t];
        cell_price[t] = prices[cell.k][cell.l];
        const double travel = (1.0 - pop.etas[cell.l]) / n;
        omega_of[t] = bill_traffic + pop.n_aliens / n - travel;
        const double beta = travel * (base - pop.g(cell.k, cell_price[t]));
        bound[t] = omega_of[t] * pop.g(cell.k, cell_price[t]) - beta;
    }
    std::vector<double> fee = bound;
    for (std::size_t round = 0; round < nc; ++round) {
        bool changed = false;
        for (std::size_t t = 0; t < nc; ++t) {
            const double g_own = pop.g(chain[t].k, cell_price[t]);
            for (std::size_t s = 0; s < nc; ++s) {
                if (s == t) continue;
                const double cap =
                    fee[s] + omega_of[t] * (g_own - pop.g(chain[t].k, cell_price[s]));
                if (cap < fee[t] - 1e-15) {
                    fee[t] = cap;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    for (std::size_t t = 0; t < nc; ++t) fees[chain[t].k][chain[t].l] = fee[t];
    return fees;
}

namespace {

HeteroContract assemble_contract(const HeteroPopulation& pop,
                                 const std::vector<ChainCell>& chain,
                                 const std::vector<std::vector<double>>& prices,
                                 const std::vector<std::vector<double>>& fees,
                                 double p0) {
    HeteroContract c;
    c.items.assign(pop.type_count(),
                   std::vector<ContractItem>(pop.mobility_count(), ContractItem{}));
    c.linus_price = p0;
    for (const ChainCell& cell : chain)
        c.items[cell.k][cell.l] = {prices[cell.k][cell.l], fees[cell.k][cell.l]};
    return c;
}

}  // namespace

HeteroSolveReport hetero_solve_given_m(const HeteroPopulation& pop,
                                       const std::vector<int>& m, double epsilon) {
    validate_vector(pop, m);
    const int kk = pop.type_count();
    const int ll = pop.mobility_count();
    const double p0 = pop.price_cap;

    HeteroSolveReport rep;
    rep.m_star = m;

    if (bill_chain(kk, m).empty()) {  // every APO is a Linus
        HeteroContract c;
        c.items.assign(kk, std::vector<ContractItem>(ll, ContractItem{}));
        c.linus_price = p0;
        rep.contract = c;
        rep.exact_profit = hetero_operator_profit(pop, c);
        rep.decomposed_profit = rep.exact_profit;
        rep.dual_upper_bound = rep.exact_profit;
        rep.dynamic_lower_bound = rep.exact_profit;
        rep.per_type_payoffs.assign(kk, std::vector<double>(ll, 0.0));
        return rep;
    }

    const HeteroObjective obj = hetero_build_objective(pop, m, p0);
    const std::size_t nc = obj.chain.size();

    std::vector<double> ideal(nc);
    for (std::size_t t = 0; t < nc; ++t)
        ideal[t] = maximize_scalar(obj.terms[t], 0.0, pop.price_cap).first;

    std::vector<double> chain_prices;
    double bill_ub = 0.0;
    double bill_lb = 0.0;
    if (nondecreasing(ideal)) {
        chain_prices = ideal;
        for (std::size_t t = 0; t < nc; ++t) bill_ub += obj.terms[t](chain_prices[t]);
        bill_lb = bill_ub;
    } else {
        DualResult dual = dual_algorithm(obj.terms, ideal, pop.price_cap, epsilon);
        rep.iterations = dual.iterations;
        rep.dual_converged = dual.converged;
        bill_ub = dual.dual_bound;
        if (nondecreasing(dual.prices))
            chain_prices = std::move(dual.prices);
        else
            chain_prices =
                dynamic_algorithm(obj.terms, std::move(dual.prices), pop.price_cap);
        for (std::size_t t = 0; t < nc; ++t) bill_lb += obj.terms[t](chain_prices[t]);
    }
    // remove sub-tolerance inversions before the fee recursion
    for (std::size_t t = 1; t < nc; ++t)
        chain_prices[t] = std::max(chain_prices[t], chain_prices[t - 1]);

    std::vector<std::vector<double>> prices(kk, std::vector<double>(ll, 0.0));
    for (std::size_t t = 0; t < nc; ++t)
        prices[obj.chain[t].k][obj.chain[t].l] = chain_prices[t];
    const std::vector<std::vector<double>> fees = hetero_optimal_fees(pop, m, prices, p0);

    const HeteroContract c = assemble_contract(pop, obj.chain, prices, fees, p0);
    rep.contract = c;
    rep.exact_profit = hetero_operator_profit(pop, c);
    const double base = obj.linus_profit - obj.roaming_constant;
    rep.decomposed_profit = base + bill_lb;
    rep.dual_upper_bound = base + bill_ub;
    rep.dynamic_lower_bound = base + bill_lb;

    double fee_profit = 0.0;
    double naive_sum = 0.0;
    for (const ChainCell& cell : obj.chain)
        fee_profit += pop.counts[cell.k][cell.l] * c.items[cell.k][cell.l].fee;
    for (std::size_t t = 0; t < nc; ++t)
        naive_sum += obj.naive_terms[t](chain_prices[t]);
    rep.decomposition_gap = fee_profit - naive_sum;

    // A zero-price, zero-fee item is indistinguishable from the opt-out
    // sentinel (possible only when every cell is a Bill charging 0, so no
    // revenue backs any fee); report the partition the contract realizes.
    if (auto realized = c.critical_vector()) rep.m_star = *realized;

    const HeteroStats stats = hetero_stats(pop, c);
    rep.per_type_payoffs.assign(kk, std::vector<double>(ll, 0.0));
    for (const ChainCell& cell : obj.chain)
        if (c.is_bill(cell.k, cell.l))
            rep.per_type_payoffs[cell.k][cell.l] =
                hetero_bill_payoff(pop, c, stats, cell.k, cell.l);
    return rep;
}

HeteroSolveReport hetero_solve(const HeteroPopulation& pop, double epsilon,
                               long vector_cap) {
    pop.validate();
    const std::vector<std::vector<int>> vectors =
        enumerate_critical_vectors(pop.type_count(), pop.mobility_count(), vector_cap);
    HeteroSolveReport best;
    bool have = false;
    for (const std::vector<int>& m : vectors) {
        HeteroSolveReport rep = hetero_solve_given_m(pop, m, epsilon);
        if (have && rep.exact_profit <= best.exact_profit) continue;
        // The closed-form fees maximize fee revenue against the mimicry and
        // participation bounds; a candidate can still be unservable when the
        // chain prices leave no room for the non-subscriber constraints.
        if (!hetero_check_ic_ir(pop, rep.contract).is_feasible) continue;
        best = std::move(rep);
        have = true;
    }
    return best;
}

}  // namespace apmarket
