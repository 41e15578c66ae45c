#include "apmarket/market.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace apmarket {

double demand(double theta, double price, double period) {
    if (theta <= 0.0) throw std::domain_error("demand: quality must be positive");
    if (period <= 0.0) throw std::domain_error("demand: period must be positive");
    return period / (1.0 + price / theta);
}

double revenue(double theta, double price, double period) {
    return price * demand(theta, price, period);
}

bool check_demand_assumptions(DemandFn d, const std::vector<double>& thetas,
                              double price_cap, double period, int samples) {
    auto g = [&](double theta, double p) { return p * d(theta, p, period); };
    for (double theta : thetas) {
        double prev = g(theta, 0.0);
        for (int i = 1; i <= samples; ++i) {
            double p = price_cap * i / samples;
            double cur = g(theta, p);
            if (!(cur > prev)) return false;  // assumption (b)
            prev = cur;
        }
    }
    // assumption (c): increasing differences on a coarse (theta, p, p') mesh
    for (std::size_t a = 0; a + 1 < thetas.size(); ++a) {
        for (std::size_t b = a + 1; b < thetas.size(); ++b) {
            for (int i = 0; i < samples; ++i) {
                double p = price_cap * i / samples;
                double pp = price_cap * (i + 1) / samples;
                double lo = g(thetas[a], pp) - g(thetas[a], p);
                double hi = g(thetas[b], pp) - g(thetas[b], p);
                if (!(hi > lo)) return false;
            }
        }
    }
    return true;
}

double Population::total_apos() const {
    double n = 0.0;
    for (double c : counts) n += c;
    return n;
}

double Population::alien_ratio() const { return n_aliens / total_apos(); }

double Population::g(int k, double price) const {
    return revenue(qualities[k], price, period);
}

void Population::validate() const {
    if (qualities.empty()) throw std::invalid_argument("population: needs at least one type");
    if (qualities.size() != counts.size())
        throw std::invalid_argument("population: qualities/counts size mismatch");
    for (std::size_t k = 0; k < qualities.size(); ++k) {
        if (qualities[k] <= 0.0)
            throw std::invalid_argument("population: qualities must be positive");
        if (k > 0 && !(qualities[k] > qualities[k - 1]))
            throw std::invalid_argument("population: qualities must be strictly increasing");
        if (counts[k] < 1.0)
            throw std::invalid_argument("population: counts must be >= 1");
    }
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("population: eta must be in [0,1]");
    if (n_aliens < 0.0) throw std::invalid_argument("population: n_aliens must be >= 0");
    if (period <= 0.0) throw std::invalid_argument("population: period must be positive");
    if (price_cap <= 0.0) throw std::invalid_argument("population: price_cap must be positive");
}

std::vector<int> Contract::bill_types() const {
    std::vector<int> out;
    for (int k = 0; k < static_cast<int>(items.size()); ++k)
        if (is_bill(k)) out.push_back(k);
    return out;
}

std::vector<int> Contract::linus_types() const {
    std::vector<int> out;
    for (int k = 0; k < static_cast<int>(items.size()); ++k)
        if (!is_bill(k)) out.push_back(k);
    return out;
}

double Contract::bill_count(const Population& pop) const {
    double n = 0.0;
    for (int k = 0; k < static_cast<int>(items.size()); ++k)
        if (is_bill(k)) n += pop.counts[k];
    return n;
}

std::optional<int> Contract::critical_type() const {
    int k = 0;
    const int n = static_cast<int>(items.size());
    while (k < n && !is_bill(k)) ++k;
    for (int i = k; i < n; ++i)
        if (!is_bill(i)) return std::nullopt;
    return k + 1;  // 1-based: types 1..k are Linus, k+1..K Bills
}

namespace {

void require_same_k(std::size_t pop_k, std::size_t c_k) {
    if (pop_k != c_k)
        throw std::invalid_argument("contract has " + std::to_string(c_k) +
                                    " items for " + std::to_string(pop_k) + " types");
}

}  // namespace

MarketStats market_stats(const Population& pop, const Contract& c) {
    require_same_k(pop.qualities.size(), c.items.size());
    const double n = pop.total_apos();
    const double travel = (1.0 - pop.eta) / n;
    const double nb = c.bill_count(pop);

    MarketStats s;
    s.omega = travel * (nb - 1.0) + pop.n_aliens / n;
    s.mu = travel * nb + pop.n_aliens / n;

    double base = 0.0;  // sum over all APs of N_i * g_i(charged price)
    for (int k = 0; k < pop.type_count(); ++k) {
        double price = c.is_bill(k) ? c.items[k].price : c.linus_price;
        base += pop.counts[k] * pop.g(k, price);
    }
    s.nu = travel * base;

    s.beta.assign(pop.type_count(), 0.0);
    for (int k = 0; k < pop.type_count(); ++k)
        if (c.is_bill(k)) s.beta[k] = s.nu - travel * pop.g(k, c.items[k].price);
    return s;
}

double bill_payoff(const Population& pop, const Contract& c,
                   const MarketStats& stats, int k) {
    if (!c.is_bill(k)) throw std::invalid_argument("bill_payoff: type is a Linus");
    return stats.omega * pop.g(k, c.items[k].price) - c.items[k].fee - stats.beta[k];
}

double cross_payoff(const Population& pop, const Contract& c,
                    const MarketStats& stats, int k, const ContractItem& item) {
    if (item.is_linus()) return linus_payoff();
    if (c.is_bill(k))
        return stats.omega * pop.g(k, item.price) - item.fee - stats.beta[k];
    // A Linus deviating to a Bill item earns the full mu paying users (he was
    // not counted among the Bills) and pays the full roaming base nu.
    return stats.mu * pop.g(k, item.price) - item.fee - stats.nu;
}

double operator_profit(const Population& pop, const Contract& c) {
    require_same_k(pop.qualities.size(), c.items.size());
    const double n = pop.total_apos();
    const double nb = c.bill_count(pop);
    const double visits = (1.0 - pop.eta) * nb / n + pop.alien_ratio();

    double profit = 0.0;
    for (int k = 0; k < pop.type_count(); ++k) {
        if (c.is_bill(k))
            profit += pop.counts[k] * c.items[k].fee;
        else
            profit += pop.counts[k] * visits * pop.g(k, c.linus_price);
    }
    return profit;
}

// --- heterogeneous ------------------------------------------------------

double HeteroPopulation::total_apos() const {
    double n = 0.0;
    for (const auto& row : counts)
        for (double c : row) n += c;
    return n;
}

double HeteroPopulation::alien_ratio() const { return n_aliens / total_apos(); }

double HeteroPopulation::g(int k, double price) const {
    return revenue(qualities[k], price, period);
}

void HeteroPopulation::validate() const {
    if (qualities.empty() || etas.empty())
        throw std::invalid_argument("hetero population: needs K >= 1 and L >= 1");
    for (std::size_t k = 0; k < qualities.size(); ++k) {
        if (qualities[k] <= 0.0)
            throw std::invalid_argument("hetero population: qualities must be positive");
        if (k > 0 && !(qualities[k] > qualities[k - 1]))
            throw std::invalid_argument("hetero population: qualities must be strictly increasing");
    }
    for (std::size_t l = 0; l < etas.size(); ++l) {
        if (etas[l] < 0.0 || etas[l] > 1.0)
            throw std::invalid_argument("hetero population: etas must be in [0,1]");
        if (l > 0 && !(etas[l] > etas[l - 1]))
            throw std::invalid_argument("hetero population: etas must be strictly increasing");
    }
    if (counts.size() != qualities.size())
        throw std::invalid_argument("hetero population: counts must be K x L");
    for (const auto& row : counts) {
        if (row.size() != etas.size())
            throw std::invalid_argument("hetero population: counts must be K x L");
        for (double c : row)
            if (c < 0.0) throw std::invalid_argument("hetero population: counts must be >= 0");
    }
    if (total_apos() < 1.0)
        throw std::invalid_argument("hetero population: needs at least one APO");
    if (n_aliens < 0.0) throw std::invalid_argument("hetero population: n_aliens must be >= 0");
    if (period <= 0.0) throw std::invalid_argument("hetero population: period must be positive");
    if (price_cap <= 0.0) throw std::invalid_argument("hetero population: price_cap must be positive");
}

std::optional<std::vector<int>> HeteroContract::critical_vector() const {
    const int kk = static_cast<int>(items.size());
    const int ll = kk > 0 ? static_cast<int>(items[0].size()) : 0;
    std::vector<int> m(ll);
    for (int l = 0; l < ll; ++l) {
        int k = 0;
        while (k < kk && !is_bill(k, l)) ++k;
        for (int i = k; i < kk; ++i)
            if (!is_bill(i, l)) return std::nullopt;
        m[l] = k + 1;
    }
    return m;
}

HeteroStats hetero_stats(const HeteroPopulation& pop, const HeteroContract& c) {
    if (c.items.size() != pop.counts.size() ||
        (!c.items.empty() && c.items[0].size() != pop.etas.size()))
        throw std::invalid_argument("hetero contract dimensions do not match population");
    const double n = pop.total_apos();
    const int kk = pop.type_count();
    const int ll = pop.mobility_count();

    double bill_traffic = 0.0;  // sum over Bills of (1-eta_j)/N * N_{i,j}
    double base = 0.0;          // sum over all APs of N * g at the charged price
    for (int k = 0; k < kk; ++k) {
        for (int l = 0; l < ll; ++l) {
            if (c.is_bill(k, l)) {
                bill_traffic += (1.0 - pop.etas[l]) / n * pop.counts[k][l];
                base += pop.counts[k][l] * pop.g(k, c.items[k][l].price);
            } else {
                base += pop.counts[k][l] * pop.g(k, c.linus_price);
            }
        }
    }

    HeteroStats s;
    s.mu = bill_traffic + pop.n_aliens / n;
    s.nu = base;
    s.omega.resize(ll);
    for (int l = 0; l < ll; ++l)
        s.omega[l] = bill_traffic + pop.n_aliens / n - (1.0 - pop.etas[l]) / n;
    s.beta.assign(kk, std::vector<double>(ll, 0.0));
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l)
            if (c.is_bill(k, l))
                s.beta[k][l] = (1.0 - pop.etas[l]) / n *
                               (base - pop.g(k, c.items[k][l].price));
    return s;
}

double hetero_bill_payoff(const HeteroPopulation& pop, const HeteroContract& c,
                          const HeteroStats& stats, int k, int l) {
    if (!c.is_bill(k, l)) throw std::invalid_argument("hetero_bill_payoff: cell is a Linus");
    return stats.omega[l] * pop.g(k, c.items[k][l].price) - c.items[k][l].fee -
           stats.beta[k][l];
}

double hetero_cross_payoff(const HeteroPopulation& pop, const HeteroContract& c,
                           const HeteroStats& stats, int k, int l,
                           const ContractItem& item) {
    if (item.is_linus()) return linus_payoff();
    if (c.is_bill(k, l))
        return stats.omega[l] * pop.g(k, item.price) - item.fee - stats.beta[k][l];
    const double travel = (1.0 - pop.etas[l]) / pop.total_apos();
    return stats.mu * pop.g(k, item.price) - item.fee - travel * stats.nu;
}

double hetero_operator_profit(const HeteroPopulation& pop, const HeteroContract& c) {
    const double n = pop.total_apos();
    const int kk = pop.type_count();
    const int ll = pop.mobility_count();

    double bill_traffic = 0.0;
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l)
            if (c.is_bill(k, l)) bill_traffic += (1.0 - pop.etas[l]) / n * pop.counts[k][l];
    const double visits = bill_traffic + pop.alien_ratio();

    double profit = 0.0;
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l) {
            if (c.is_bill(k, l))
                profit += pop.counts[k][l] * c.items[k][l].fee;
            else
                profit += pop.counts[k][l] * visits * pop.g(k, c.linus_price);
        }
    return profit;
}

Population collapse_single_mobility(const HeteroPopulation& pop) {
    if (pop.mobility_count() != 1)
        throw std::invalid_argument("collapse_single_mobility: L must be 1");
    Population out;
    out.qualities = pop.qualities;
    out.counts.reserve(pop.counts.size());
    for (const auto& row : pop.counts) out.counts.push_back(row[0]);
    out.eta = pop.etas[0];
    out.n_aliens = pop.n_aliens;
    out.period = pop.period;
    out.price_cap = pop.price_cap;
    return out;
}

}  // namespace apmarket
