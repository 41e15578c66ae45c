#include "apmarket/feasibility.hpp"

#include <cmath>
#include <stdexcept>

namespace apmarket {

namespace {

void record(std::vector<Constraint>& violated, std::vector<Constraint>& binding,
            bool& ok, double tol, Constraint c) {
    if (c.slack < -tol) {
        ok = false;
        violated.push_back(std::move(c));
    } else if (std::abs(c.slack) <= kBindingTol) {
        binding.push_back(std::move(c));
    }
}

void hrecord(std::vector<HeteroConstraint>& violated,
             std::vector<HeteroConstraint>& binding, bool& ok, double tol,
             HeteroConstraint c) {
    if (c.slack < -tol) {
        ok = false;
        violated.push_back(std::move(c));
    } else if (std::abs(c.slack) <= kBindingTol) {
        binding.push_back(std::move(c));
    }
}

}  // namespace

FeasibilityReport check_ic_ir(const Population& pop, const Contract& c,
                              double tolerance) {
    const MarketStats stats = market_stats(pop, c);
    const int kk = pop.type_count();

    FeasibilityReport rep;
    for (int k = 0; k < kk; ++k) {
        const double own = c.is_bill(k) ? bill_payoff(pop, c, stats, k) : linus_payoff();
        record(rep.violated, rep.binding, rep.is_feasible, tolerance,
               {"IR", k, -1, own});
        // the Linus sentinel first, then Bill items in type order
        record(rep.violated, rep.binding, rep.is_feasible, tolerance,
               {"IC", k, -1, own - linus_payoff()});
        for (int i = 0; i < kk; ++i) {
            if (!c.is_bill(i) || i == k) continue;
            const double dev = cross_payoff(pop, c, stats, k, c.items[i]);
            record(rep.violated, rep.binding, rep.is_feasible, tolerance,
                   {"IC", k, i, own - dev});
        }
    }
    if (rep.is_feasible) rep.critical_type = c.critical_type();
    return rep;
}

FeasibilityReport check_theorem1(const Population& pop, const Contract& c,
                                 double tolerance) {
    const int kk = pop.type_count();
    FeasibilityReport rep;

    // (13) Linus types form a prefix.
    const auto m = c.critical_type();
    if (!m) {
        rep.is_feasible = false;
        rep.violated.push_back({"partition(13)", -1, -1, -1.0});
        return rep;
    }
    rep.critical_type = m;

    const MarketStats stats = market_stats(pop, c);
    const auto bills = c.bill_types();
    const auto linus = c.linus_types();
    bool ok = true;

    // (14) price box and ordering over the Bill set.
    record(rep.violated, rep.binding, ok, tolerance,
           {"price-box(14)", -1, -1, c.linus_price});
    record(rep.violated, rep.binding, ok, tolerance,
           {"price-box(14)", -1, -1, pop.price_cap - c.linus_price});
    for (std::size_t a = 0; a < bills.size(); ++a) {
        const int k = bills[a];
        record(rep.violated, rep.binding, ok, tolerance,
               {"price-box(14)", k, -1, c.items[k].price});
        record(rep.violated, rep.binding, ok, tolerance,
               {"price-box(14)", k, -1, pop.price_cap - c.items[k].price});
        if (a > 0) {
            const int i = bills[a - 1];
            record(rep.violated, rep.binding, ok, tolerance,
                   {"price-order(14)", i, k, c.items[k].price - c.items[i].price});
        }
    }

    // (15) fee lower bound from Linus ICs; checked for every Linus type even
    // though only the largest one can bind.
    for (int k : bills)
        for (int j : linus)
            record(rep.violated, rep.binding, ok, tolerance,
                   {"fee-lower(15)", k, j,
                    c.items[k].fee -
                        (stats.mu * pop.g(j, c.items[k].price) - stats.nu)});

    // (16) fee upper bound = Bill IR.
    for (int k : bills)
        record(rep.violated, rep.binding, ok, tolerance,
               {"fee-upper(16)", k, -1,
                stats.omega * pop.g(k, c.items[k].price) - stats.beta[k] -
                    c.items[k].fee});

    // (17) pairwise fee sandwich between Bills.
    for (std::size_t a = 0; a < bills.size(); ++a) {
        for (std::size_t b = a + 1; b < bills.size(); ++b) {
            const int i = bills[a];
            const int k = bills[b];
            const double dfee = c.items[k].fee - c.items[i].fee;
            const double lo =
                stats.omega * (pop.g(i, c.items[k].price) - pop.g(i, c.items[i].price));
            const double hi =
                stats.omega * (pop.g(k, c.items[k].price) - pop.g(k, c.items[i].price));
            record(rep.violated, rep.binding, ok, tolerance,
                   {"fee-sandwich(17)", i, k, dfee - lo});
            record(rep.violated, rep.binding, ok, tolerance,
                   {"fee-sandwich(17)", k, i, hi - dfee});
        }
    }

    rep.is_feasible = ok;
    if (!ok) rep.critical_type.reset();
    return rep;
}

std::vector<LemmaVerdict> structural_lemmas_audit(const Population& pop,
                                                  const Contract& c) {
    if (!check_ic_ir(pop, c).is_feasible)
        throw std::invalid_argument("structural_lemmas_audit: contract is not feasible");

    std::vector<LemmaVerdict> out;
    const auto bills = c.bill_types();

    LemmaVerdict price_fee{"price-fee co-monotone", true, ""};
    for (std::size_t a = 0; a < bills.size(); ++a)
        for (std::size_t b = 0; b < bills.size(); ++b) {
            const auto& x = c.items[bills[a]];
            const auto& y = c.items[bills[b]];
            if ((x.price > y.price) != (x.fee > y.fee)) price_fee.holds = false;
        }
    out.push_back(price_fee);

    LemmaVerdict quality_price{"quality implies price order", true, ""};
    for (std::size_t a = 0; a + 1 < bills.size(); ++a)
        if (!(c.items[bills[a + 1]].price > c.items[bills[a]].price ||
              std::abs(c.items[bills[a + 1]].price - c.items[bills[a]].price) <=
                  kBindingTol))
            quality_price.holds = false;
    out.push_back(quality_price);

    LemmaVerdict prefix{"critical-type prefix", c.critical_type().has_value(), ""};
    out.push_back(prefix);
    return out;
}

// --- heterogeneous ------------------------------------------------------

HeteroFeasibilityReport hetero_check_ic_ir(const HeteroPopulation& pop,
                                           const HeteroContract& c,
                                           double tolerance) {
    const HeteroStats stats = hetero_stats(pop, c);
    const int kk = pop.type_count();
    const int ll = pop.mobility_count();

    HeteroFeasibilityReport rep;
    for (int k = 0; k < kk; ++k) {
        for (int l = 0; l < ll; ++l) {
            const double own = c.is_bill(k, l)
                                   ? hetero_bill_payoff(pop, c, stats, k, l)
                                   : linus_payoff();
            hrecord(rep.violated, rep.binding, rep.is_feasible, tolerance,
                    {"IR", k, l, -1, -1, own});
            hrecord(rep.violated, rep.binding, rep.is_feasible, tolerance,
                    {"IC", k, l, -1, -1, own - linus_payoff()});
            for (int i = 0; i < kk; ++i)
                for (int j = 0; j < ll; ++j) {
                    if (!c.is_bill(i, j) || (i == k && j == l)) continue;
                    const double dev =
                        hetero_cross_payoff(pop, c, stats, k, l, c.items[i][j]);
                    hrecord(rep.violated, rep.binding, rep.is_feasible, tolerance,
                            {"IC", k, l, i, j, own - dev});
                }
        }
    }
    if (rep.is_feasible) rep.critical_vector = c.critical_vector();
    return rep;
}

HeteroFeasibilityReport check_theorem2_hetero(const HeteroPopulation& pop,
                                              const HeteroContract& c,
                                              double tolerance) {
    const int kk = pop.type_count();
    const int ll = pop.mobility_count();
    HeteroFeasibilityReport rep;

    // (con1new) each column's Linus set is a prefix.
    const auto m = c.critical_vector();
    if (!m) {
        rep.is_feasible = false;
        rep.violated.push_back({"partition(con1)", -1, -1, -1, -1, -1.0});
        return rep;
    }
    rep.critical_vector = m;
    bool ok = true;

    // (con11) monotone critical vector.
    for (int l = 0; l + 1 < ll; ++l)
        hrecord(rep.violated, rep.binding, ok, tolerance,
                {"critical-order(con11)", -1, l, -1, l + 1,
                 static_cast<double>((*m)[l] - (*m)[l + 1])});

    const HeteroStats stats = hetero_stats(pop, c);
    const double n = pop.total_apos();

    // (con2new) price box.
    hrecord(rep.violated, rep.binding, ok, tolerance,
            {"price-box(con2)", -1, -1, -1, -1, c.linus_price});
    hrecord(rep.violated, rep.binding, ok, tolerance,
            {"price-box(con2)", -1, -1, -1, -1, pop.price_cap - c.linus_price});
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l)
            if (c.is_bill(k, l)) {
                hrecord(rep.violated, rep.binding, ok, tolerance,
                        {"price-box(con2)", k, l, -1, -1, c.items[k][l].price});
                hrecord(rep.violated, rep.binding, ok, tolerance,
                        {"price-box(con2)", k, l, -1, -1,
                         pop.price_cap - c.items[k][l].price});
            }

    // (con2new2-4) the price chain. A Linus predecessor counts as price 0.
    auto price_at = [&](int k, int l) {
        return c.is_bill(k, l) ? c.items[k][l].price : 0.0;
    };
    for (int l = 0; l < ll; ++l) {
        for (int k = (*m)[l] - 1; k < kk; ++k) {
            const double p = c.items[k][l].price;
            if (l > 0 && c.is_bill(k, l - 1))
                hrecord(rep.violated, rep.binding, ok, tolerance,
                        {"price-chain", k, l - 1, k, l, p - price_at(k, l - 1)});
            if (k > 0)
                hrecord(rep.violated, rep.binding, ok, tolerance,
                        {"price-chain", k - 1, ll - 1, k, l, p - price_at(k - 1, ll - 1)});
            if (l + 1 < ll)
                hrecord(rep.violated, rep.binding, ok, tolerance,
                        {"price-chain", k, l, k, l + 1, price_at(k, l + 1) - p});
            if (l == ll - 1 && k + 1 < kk) {
                // first Bill column of the next quality row, if any
                for (int j = 0; j < ll; ++j)
                    if (k + 2 >= (*m)[j]) {  // 1-based: k+1 (0-based k+1) >= m_j
                        hrecord(rep.violated, rep.binding, ok, tolerance,
                                {"price-chain", k, l, k + 1, j,
                                 price_at(k + 1, j) - p});
                        break;
                    }
            }
        }
    }

    // (con3new) fee lower bounds from Linus ICs.
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l) {
            if (!c.is_bill(k, l)) continue;
            for (int i = 0; i < kk; ++i)
                for (int j = 0; j < ll; ++j) {
                    if (c.is_bill(i, j)) continue;
                    const double travel = (1.0 - pop.etas[j]) / n;
                    hrecord(rep.violated, rep.binding, ok, tolerance,
                            {"fee-lower(con3)", k, l, i, j,
                             c.items[k][l].fee -
                                 (stats.mu * pop.g(i, c.items[k][l].price) -
                                  travel * stats.nu)});
                }
        }

    // (con4new) fee upper bound = Bill IR.
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l)
            if (c.is_bill(k, l))
                hrecord(rep.violated, rep.binding, ok, tolerance,
                        {"fee-upper(con4)", k, l, -1, -1,
                         stats.omega[l] * pop.g(k, c.items[k][l].price) -
                             stats.beta[k][l] - c.items[k][l].fee});

    // (con5new) pairwise fee sandwich between Bills.
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l) {
            if (!c.is_bill(k, l)) continue;
            for (int i = 0; i < kk; ++i)
                for (int j = 0; j < ll; ++j) {
                    if (!c.is_bill(i, j) || (i == k && j == l)) continue;
                    const double dfee = c.items[k][l].fee - c.items[i][j].fee;
                    const double lo = stats.omega[j] * (pop.g(i, c.items[k][l].price) -
                                                        pop.g(i, c.items[i][j].price));
                    const double hi = stats.omega[l] * (pop.g(k, c.items[k][l].price) -
                                                        pop.g(k, c.items[i][j].price));
                    hrecord(rep.violated, rep.binding, ok, tolerance,
                            {"fee-sandwich(con5)", k, l, i, j, dfee - lo});
                    hrecord(rep.violated, rep.binding, ok, tolerance,
                            {"fee-sandwich(con5)", k, l, i, j, hi - dfee});
                }
        }

    rep.is_feasible = ok;
    if (!ok) rep.critical_vector.reset();
    return rep;
}

std::vector<LemmaVerdict> hetero_structural_lemmas_audit(
    const HeteroPopulation& pop, const HeteroContract& c) {
    if (!hetero_check_ic_ir(pop, c).is_feasible)
        throw std::invalid_argument(
            "hetero_structural_lemmas_audit: contract is not feasible");

    const int kk = pop.type_count();
    const int ll = pop.mobility_count();
    std::vector<LemmaVerdict> out;

    LemmaVerdict price_fee{"price-fee co-monotone", true, ""};
    LemmaVerdict orders{"quality/mobility price orders", true, ""};
    for (int k = 0; k < kk; ++k)
        for (int l = 0; l < ll; ++l) {
            if (!c.is_bill(k, l)) continue;
            for (int i = 0; i < kk; ++i)
                for (int j = 0; j < ll; ++j) {
                    if (!c.is_bill(i, j)) continue;
                    const auto& x = c.items[k][l];
                    const auto& y = c.items[i][j];
                    if ((x.price > y.price) != (x.fee > y.fee)) price_fee.holds = false;
                    if (j == l && k > i && !(x.price > y.price - kBindingTol))
                        orders.holds = false;
                    if (k == i && l > j && !(x.price >= y.price - kFeasibilityTol))
                        orders.holds = false;
                    if (l < j && k > i && !(x.price > y.price - kBindingTol))
                        orders.holds = false;
                }
        }
    out.push_back(price_fee);
    out.push_back(orders);

    const auto m = c.critical_vector();
    LemmaVerdict prefix{"per-column critical prefix", m.has_value(), ""};
    out.push_back(prefix);
    LemmaVerdict mono{"critical vector nonincreasing", true, ""};
    if (m) {
        for (int l = 0; l + 1 < ll; ++l)
            if ((*m)[l] < (*m)[l + 1]) mono.holds = false;
    } else {
        mono.holds = false;
    }
    out.push_back(mono);
    return out;
}

}  // namespace apmarket
