#include "apmarket/solver.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace apmarket {

namespace {

// Multiplier coefficient of p_k inside the k-th Lagrangian piece.
double lambda_coef(const std::vector<double>& lambda, std::size_t k, std::size_t n) {
    if (n == 1) return 0.0;
    if (k == 0) return lambda[0];
    if (k == n - 1) return -lambda[n - 2];
    return lambda[k] - lambda[k - 1];
}

bool nondecreasing(const std::vector<double>& v, double tol = 1e-12) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i] > v[i + 1] + tol) return false;
    return true;
}

}  // namespace

DualResult dual_algorithm(std::span<const ScalarTerm> terms,
                          std::vector<double> init_prices, double price_cap,
                          double epsilon, long max_iterations) {
    const std::size_t n = terms.size();
    if (init_prices.size() != n)
        throw std::invalid_argument("dual_algorithm: init_prices size mismatch");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("dual_algorithm: epsilon must be in (0,1)");

    DualResult res;
    res.prices = std::move(init_prices);
    if (n <= 1) {
        res.dual_bound = n == 1 ? terms[0](res.prices[0]) : 0.0;
        return res;
    }

    std::vector<double> lambda(n - 1, 0.0);
    std::vector<double> prev(n - 1, -1.0);
    long t = 0;
    auto settled = [&] {
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (std::abs(lambda[i] - prev[i]) > epsilon) return false;
        return true;
    };
    while (!settled() && t < max_iterations) {
        prev = lambda;
        const double step = 1.0 / std::sqrt(static_cast<double>(t) + 1.0);
        for (std::size_t k = 0; k + 1 < n; ++k)
            lambda[k] = std::max(lambda[k] + step * (res.prices[k] - res.prices[k + 1]), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double c = lambda_coef(lambda, k, n);
            const auto& f = terms[k];
            res.prices[k] =
                maximize_scalar([&](double p) { return f(p) - c * p; }, 0.0, price_cap)
                    .first;
        }
        ++t;
    }
    res.iterations = t;
    res.converged = settled();
    res.lambda = lambda;

    // Weak duality: -d(lambda) bounds the constrained maximum of sum f_k.
    double bound = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double c = lambda_coef(lambda, k, n);
        const auto& f = terms[k];
        bound += maximize_scalar([&](double p) { return f(p) - c * p; }, 0.0, price_cap)
                     .second;
    }
    res.dual_bound = bound;
    return res;
}

std::vector<double> dynamic_algorithm(std::span<const ScalarTerm> terms,
                                      std::vector<double> prices, double price_cap,
                                      int* merges) {
    const std::size_t n = terms.size();
    if (prices.size() != n)
        throw std::invalid_argument("dynamic_algorithm: prices size mismatch");
    if (merges) *merges = 0;
    if (n <= 1) return prices;

    // Merge groups stay atomic once combined, so each round removes a group.
    struct Group {
        std::size_t begin, end;  // half-open term range
        double price;
    };
    std::vector<Group> groups;
    groups.reserve(n);
    for (std::size_t i = 0; i < n; ++i) groups.push_back({i, i + 1, prices[i]});

    for (;;) {
        std::size_t g = groups.size();
        for (std::size_t i = 0; i + 1 < groups.size(); ++i)
            if (groups[i].price > groups[i + 1].price) {
                g = i;
                break;
            }
        if (g == groups.size()) break;

        Group merged{groups[g].begin, groups[g + 1].end, 0.0};
        merged.price = maximize_scalar(
                           [&](double p) {
                               double v = 0.0;
                               for (std::size_t t = merged.begin; t < merged.end; ++t)
                                   v += terms[t](p);
                               return v;
                           },
                           0.0, price_cap)
                           .first;
        groups[g] = merged;
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(g) + 1);
        if (merges) ++*merges;
    }

    for (const Group& grp : groups)
        for (std::size_t i = grp.begin; i < grp.end; ++i) prices[i] = grp.price;
    return prices;
}

std::vector<double> optimal_fees(const Population& pop, int m,
                                 const std::vector<double>& prices, double p0) {
    const int kk = pop.type_count();
    if (m < 1 || m > kk + 1) throw std::invalid_argument("optimal_fees: bad critical type");
    if (m == kk + 1) {
        if (!prices.empty())
            throw std::invalid_argument("optimal_fees: all-Linus takes no prices");
        return {};
    }
    const int nb = kk - m + 1;
    if (static_cast<int>(prices.size()) != nb)
        throw std::invalid_argument("optimal_fees: need one price per Bill type");
    for (int i = 0; i < nb; ++i) {
        if (prices[i] < -1e-12 || prices[i] > pop.price_cap + 1e-12)
            throw std::invalid_argument("optimal_fees: price outside [0, p_max]");
        if (i > 0 && prices[i] + 1e-12 < prices[i - 1])
            throw std::invalid_argument("optimal_fees: prices must be nondecreasing");
    }

    const double n = pop.total_apos();
    const double travel = (1.0 - pop.eta) / n;
    double nbills = 0.0;
    for (int k = m - 1; k < kk; ++k) nbills += pop.counts[k];
    const double omega = travel * (nbills - 1.0) + pop.n_aliens / n;

    // roaming payment of the critical type
    double beta_m = travel * (pop.counts[m - 1] - 1.0) * pop.g(m - 1, prices[0]);
    for (int k = m; k < kk; ++k)
        beta_m += travel * pop.counts[k] * pop.g(k, prices[k - m + 1]);
    for (int k = 0; k < m - 1; ++k) beta_m += travel * pop.counts[k] * pop.g(k, p0);

    std::vector<double> fees(nb);
    fees[0] = omega * pop.g(m - 1, prices[0]) - beta_m;
    for (int i = 1; i < nb; ++i) {
        const int k = m - 1 + i;
        fees[i] = fees[i - 1] + omega * (pop.g(k, prices[i]) - pop.g(k, prices[i - 1]));
    }
    return fees;
}

SeparableObjective build_objective(const Population& pop, int m, double p0) {
    const int kk = pop.type_count();
    if (m < 1 || m > kk)
        throw std::invalid_argument("build_objective: m must leave a nonempty Bill set");

    const double n = pop.total_apos();
    const double travel = (1.0 - pop.eta) / n;

    SeparableObjective obj;
    obj.critical_type = m;
    obj.tail_counts.assign(kk - m + 2, 0.0);
    for (int k = kk - 1; k >= m - 1; --k)
        obj.tail_counts[k - m + 1] = obj.tail_counts[k - m + 2] + pop.counts[k];
    const double nbills = obj.tail_counts[0];
    obj.omega = travel * (nbills - 1.0) + pop.n_aliens / n;

    for (int k = m - 1; k < kk; ++k) {
        const int i = k - m + 1;
        ScalarTerm f;
        f.period = pop.period;
        f.own_theta = pop.qualities[k];
        if (k == m - 1) {
            f.own_coef = (travel + obj.omega) * obj.tail_counts[i];
            f.sub_coef = obj.omega * obj.tail_counts[i + 1];
        } else if (k < kk - 1) {
            f.own_coef = obj.omega * obj.tail_counts[i];
            f.sub_coef = obj.omega * obj.tail_counts[i + 1];
        } else {
            f.own_coef = obj.omega * pop.counts[k];
            f.sub_coef = 0.0;
        }
        if (f.sub_coef != 0.0) f.sub_theta = pop.qualities[k + 1];
        obj.naive_terms.push_back(f);
        // Exact variant: the critical type's binding participation fee nets
        // out its roaming spend, which charges every Bill price term by
        // s_m * (1-eta)/N * N_k * g_k(p_k); the simplified form drops this.
        f.own_coef -= obj.tail_counts[0] * travel * pop.counts[k];
        obj.terms.push_back(f);
    }

    obj.linus_profit = 0.0;
    obj.roaming_constant = 0.0;
    const double visits = (1.0 - pop.eta) * nbills / n + pop.alien_ratio();
    for (int k = 0; k < m - 1; ++k) {
        obj.linus_profit += pop.counts[k] * visits * pop.g(k, p0);
        obj.roaming_constant +=
            obj.tail_counts[0] * travel * pop.counts[k] * pop.g(k, p0);
    }
    return obj;
}

namespace {

Contract assemble_contract(const Population& pop, int m,
                           const std::vector<double>& prices,
                           const std::vector<double>& fees, double p0) {
    Contract c;
    c.items.assign(pop.type_count(), ContractItem{});
    c.linus_price = p0;
    for (int k = m - 1; k < pop.type_count(); ++k)
        c.items[k] = {prices[k - m + 1], fees[k - m + 1]};
    return c;
}

}  // namespace

SolveReport solve_given_m(const Population& pop, int m, double epsilon) {
    const int kk = pop.type_count();
    if (m < 1 || m > kk + 1) throw std::invalid_argument("solve_given_m: bad critical type");
    const double p0 = pop.price_cap;

    SolveReport rep;
    rep.m_star = m;

    if (m == kk + 1) {
        Contract c;
        c.items.assign(kk, ContractItem{});
        c.linus_price = p0;
        rep.contract = c;
        rep.exact_profit = operator_profit(pop, c);
        rep.decomposed_profit = rep.exact_profit;
        rep.dual_upper_bound = rep.exact_profit;
        rep.dynamic_lower_bound = rep.exact_profit;
        rep.per_type_payoffs.assign(kk, 0.0);
        return rep;
    }

    const SeparableObjective obj = build_objective(pop, m, p0);
    const std::size_t nb = obj.terms.size();

    std::vector<double> ideal(nb);
    for (std::size_t i = 0; i < nb; ++i)
        ideal[i] = maximize_scalar(obj.terms[i], 0.0, pop.price_cap).first;

    std::vector<double> prices;
    double bill_ub = 0.0;
    double bill_lb = 0.0;
    if (nondecreasing(ideal)) {
        prices = ideal;
        for (std::size_t i = 0; i < nb; ++i) bill_ub += obj.terms[i](prices[i]);
        bill_lb = bill_ub;
    } else {
        DualResult dual =
            dual_algorithm(obj.terms, ideal, pop.price_cap, epsilon);
        rep.iterations = dual.iterations;
        rep.dual_converged = dual.converged;
        bill_ub = dual.dual_bound;
        if (nondecreasing(dual.prices))
            prices = std::move(dual.prices);
        else
            prices = dynamic_algorithm(obj.terms, std::move(dual.prices), pop.price_cap);
        for (std::size_t i = 0; i < nb; ++i) bill_lb += obj.terms[i](prices[i]);
    }
    // remove sub-tolerance inversions before the fee recursion
    for (std::size_t i = 1; i < nb; ++i) prices[i] = std::max(prices[i], prices[i - 1]);

    const std::vector<double> fees = optimal_fees(pop, m, prices, p0);
    const Contract c = assemble_contract(pop, m, prices, fees, p0);
    rep.contract = c;
    rep.exact_profit = operator_profit(pop, c);
    const double base = obj.linus_profit - obj.roaming_constant;
    rep.decomposed_profit = base + bill_lb;
    rep.dual_upper_bound = base + bill_ub;
    rep.dynamic_lower_bound = base + bill_lb;

    double fee_profit = 0.0;
    double naive_sum = 0.0;
    for (int k = m - 1; k < kk; ++k) fee_profit += pop.counts[k] * c.items[k].fee;
    for (std::size_t i = 0; i < nb; ++i) naive_sum += obj.naive_terms[i](prices[i]);
    rep.decomposition_gap = fee_profit - naive_sum;

    // A zero-price, zero-fee item is indistinguishable from the opt-out
    // sentinel (possible only when every AP is a Bill charging 0, so no
    // revenue backs any fee); report the partition the contract realizes.
    if (auto realized = c.critical_type()) rep.m_star = *realized;

    const MarketStats stats = market_stats(pop, c);
    rep.per_type_payoffs.assign(kk, 0.0);
    for (int k = m - 1; k < kk; ++k)
        if (c.is_bill(k)) rep.per_type_payoffs[k] = bill_payoff(pop, c, stats, k);
    return rep;
}

SolveReport solve(const Population& pop, double epsilon) {
    pop.validate();
    SolveReport best;
    bool have = false;
    for (int m = 1; m <= pop.type_count() + 1; ++m) {
        SolveReport rep = solve_given_m(pop, m, epsilon);
        if (!have || rep.exact_profit > best.exact_profit) {
            best = std::move(rep);
            have = true;
        }
    }
    return best;
}

}  // namespace apmarket
