#pragma once

// Market primitives for a crowdsourced Wi-Fi community: populations of
// access-point owners (APOs), the contract menu offered by the operator,
// demand/revenue curves, APO payoffs and the operator profit objective.
//
// All types are immutable value types after construction and every
// operation is a pure function; concurrent reads are safe.

#include <optional>
#include <vector>

namespace apmarket {

// Connection time of a visitor on an AP of quality `theta` at unit price
// `price`, over a subscription period of length `period`.
// Throws std::domain_error if theta <= 0 or period <= 0.
double demand(double theta, double price, double period);

// Revenue collected from one visitor: price * demand. Strictly increasing
// in price on [0, inf) and satisfies increasing differences in (theta, p).
double revenue(double theta, double price, double period);

// Signature for a pluggable demand curve: (theta, price, period) -> time.
// `demand` above is the shipped default; anything passed to
// `check_demand_assumptions` must be positive, nonincreasing in price and
// nondecreasing in theta with increasing differences of p*d.
using DemandFn = double (*)(double theta, double price, double period);

// Numerically probes the price-monotonicity and increasing-differences
// assumptions of p*d(theta,p) on a quality/price sample. Returns false on
// the first violated pair.
bool check_demand_assumptions(DemandFn d, const std::vector<double>& thetas,
                              double price_cap, double period, int samples = 64);

// A market instance: K quality types, homogeneous mobility.
struct Population {
    std::vector<double> qualities;  // theta_k, strictly increasing
    std::vector<double> counts;     // N_k, each >= 1
    double eta = 0.5;               // probability of staying home, in [0,1]
    double n_aliens = 0.0;          // N_A >= 0
    double period = 1.0;            // T > 0
    double price_cap = 1.0;         // p_max > 0

    int type_count() const { return static_cast<int>(qualities.size()); }
    double total_apos() const;                    // N
    double alien_ratio() const;                   // a = N_A / N
    double g(int k, double price) const;          // revenue at a type-k AP (k 0-based)

    // Throws std::invalid_argument when an invariant is broken.
    void validate() const;
};

// One menu entry: the access price charged at the APO's AP and the
// subscription fee paid to the operator. (0, 0) is the Linus sentinel.
struct ContractItem {
    double price = 0.0;
    double fee = 0.0;

    bool is_linus() const { return price == 0.0 && fee == 0.0; }
};

// The full menu: one item per quality type, plus the price the operator
// charges at Linus APs.
struct Contract {
    std::vector<ContractItem> items;
    double linus_price = 0.0;  // p0 in [0, p_max]

    bool is_bill(int k) const { return !items[k].is_linus(); }
    std::vector<int> bill_types() const;   // 0-based, ascending
    std::vector<int> linus_types() const;  // 0-based, ascending
    double bill_count(const Population& pop) const;  // N_B

    // If the Linus set is exactly the prefix {0..m-2} (1-based types
    // {1..m-1}), returns the 1-based critical type m in {1..K+1}.
    std::optional<int> critical_type() const;
};

// Derived quantities for a (population, contract) pair. `beta[k]` is the
// expected roaming payment of a type-k Bill; it is set to 0 for Linus
// types and never read by any formula.
struct MarketStats {
    double omega = 0.0;  // expected paying users per Bill AP
    double mu = 0.0;     // expected Bills+Aliens per AP; omega + (1-eta)/N
    double nu = 0.0;     // expected roaming payment of a would-be Bill
    std::vector<double> beta;
};

MarketStats market_stats(const Population& pop, const Contract& c);

// Payoff of a type-k Bill at his own item: omega*g_k(p_k) - delta_k - beta_k.
// Throws std::invalid_argument if k is a Linus type.
double bill_payoff(const Population& pop, const Contract& c,
                   const MarketStats& stats, int k);

// A Linus payoff is normalized to zero.
constexpr double linus_payoff() { return 0.0; }

// Payoff of a type-k APO evaluating `item` (one of the contract's Bill
// items or the Linus sentinel) while the rest of the market stays at the
// designed contract. The deviator's roaming payment keeps its designed
// value, so a type evaluating its own item recovers bill_payoff.
double cross_payoff(const Population& pop, const Contract& c,
                    const MarketStats& stats, int k, const ContractItem& item);

// Operator profit under `c`: Linus-AP revenue plus collected fees.
// Does not require the contract to be feasible.
double operator_profit(const Population& pop, const Contract& c);

// --- Heterogeneous mobility: K quality types x L mobility levels -------

struct HeteroPopulation {
    std::vector<double> qualities;             // K, strictly increasing
    std::vector<double> etas;                  // L, strictly increasing, in [0,1]
    std::vector<std::vector<double>> counts;   // K x L, each >= 0, total >= 1
    double n_aliens = 0.0;
    double period = 1.0;
    double price_cap = 1.0;

    int type_count() const { return static_cast<int>(qualities.size()); }
    int mobility_count() const { return static_cast<int>(etas.size()); }
    double total_apos() const;
    double alien_ratio() const;
    double g(int k, double price) const;

    void validate() const;
};

struct HeteroContract {
    std::vector<std::vector<ContractItem>> items;  // K x L
    double linus_price = 0.0;

    bool is_bill(int k, int l) const { return !items[k][l].is_linus(); }

    // Per-column critical types: if every column's Linus set is a prefix,
    // returns m_l in {1..K+1} for each l.
    std::optional<std::vector<int>> critical_vector() const;
};

struct HeteroStats {
    std::vector<double> omega;                // per mobility level l
    double mu = 0.0;                          // paying users per AP
    double nu = 0.0;                          // aggregate payment base (no (1-eta)/N factor)
    std::vector<std::vector<double>> beta;    // K x L, 0 for Linus cells
};

HeteroStats hetero_stats(const HeteroPopulation& pop, const HeteroContract& c);

double hetero_bill_payoff(const HeteroPopulation& pop, const HeteroContract& c,
                          const HeteroStats& stats, int k, int l);

double hetero_cross_payoff(const HeteroPopulation& pop, const HeteroContract& c,
                           const HeteroStats& stats, int k, int l,
                           const ContractItem& item);

double hetero_operator_profit(const HeteroPopulation& pop, const HeteroContract& c);

// Collapses an L=1 heterogeneous instance to the homogeneous model.
Population collapse_single_mobility(const HeteroPopulation& pop);

}  // namespace apmarket
