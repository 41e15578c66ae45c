#pragma once

// Operator-optimal contract under homogeneous mobility: closed-form fees,
// the separable per-price objective, scalar maximization, the subgradient
// dual algorithm and the merge-based dynamic algorithm, plus the exhaustive
// critical-type search.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "apmarket/market.hpp"

namespace apmarket {

inline constexpr int kScalarGridPoints = 1024;
inline constexpr double kScalarTol = 1e-8;
inline constexpr double kDefaultEpsilon = 1e-4;
inline constexpr long kDualIterationCap = 100000;

// One separable profit term a*g(theta_own, p) - b*g(theta_sub, p).
struct ScalarTerm {
    double own_coef = 0.0;
    double own_theta = 1.0;
    double sub_coef = 0.0;
    double sub_theta = 1.0;
    double period = 1.0;

    double operator()(double p) const {
        double v = own_coef * revenue(own_theta, p, period);
        if (sub_coef != 0.0) v -= sub_coef * revenue(sub_theta, p, period);
        return v;
    }
};

struct SeparableObjective {
    int critical_type = 1;  // m, 1-based in {1..K}
    double omega = 0.0;     // computed from m alone
    // Exact decomposition: sum of terms[k](p_k) minus roaming_constant equals
    // the fee profit collected from Bills under the closed-form fees.
    std::vector<ScalarTerm> terms;
    // Simplified per-price terms that drop the Bills' roaming cross-payments;
    // their sum overstates the fee profit (see decomposition_gap).
    std::vector<ScalarTerm> naive_terms;
    std::vector<double> tail_counts;  // s_k for k = m..K, then the 0 sentinel
    double linus_profit = 0.0;        // Linus-AP revenue at the chosen p0
    // What the Bill side spends roaming at Linus APs (fixed once p0 is).
    double roaming_constant = 0.0;
};

// Deterministic scalar maximization: uniform grid scan (ties keep the
// smallest argument) refined by golden-section inside the best bracket.
// Returns (argmax, max). Throws on non-finite values.
template <class F>
std::pair<double, double> maximize_scalar(F&& f, double lo, double hi,
                                          double tolerance = kScalarTol,
                                          int grid = kScalarGridPoints) {
    if (!(lo <= hi)) throw std::invalid_argument("maximize_scalar: lo > hi");
    if (lo == hi) return {lo, f(lo)};

    double best_x = lo;
    double best_v = f(lo);
    if (!std::isfinite(best_v)) throw std::domain_error("maximize_scalar: non-finite value");
    int best_i = 0;
    for (int i = 1; i < grid; ++i) {
        const double x = lo + (hi - lo) * i / (grid - 1);
        const double v = f(x);
        if (!std::isfinite(v)) throw std::domain_error("maximize_scalar: non-finite value");
        if (v > best_v) {
            best_v = v;
            best_x = x;
            best_i = i;
        }
    }

    double a = lo + (hi - lo) * std::max(best_i - 1, 0) / (grid - 1);
    double b = lo + (hi - lo) * std::min(best_i + 1, grid - 1) / (grid - 1);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tolerance) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
    }
    const double mid = 0.5 * (a + b);
    const double fmid = f(mid);
    if (fmid > best_v) return {mid, fmid};
    return {best_x, best_v};
}

struct DualResult {
    std::vector<double> prices;  // final primal point p^L
    std::vector<double> lambda;
    double dual_bound = 0.0;  // upper bound on the constrained max of sum f_k
    long iterations = 0;
    bool converged = true;
};

// Subgradient ascent on the multipliers of the monotone-price constraints.
// `init_prices` should be the per-term maximizers.
DualResult dual_algorithm(std::span<const ScalarTerm> terms,
                          std::vector<double> init_prices, double price_cap,
                          double epsilon, long max_iterations = kDualIterationCap);

// Merges infeasible (strictly descending) runs to a common maximizing price
// until the vector is nondecreasing. Merge groups are kept atomic, so at
// most terms.size()-1 merges happen. `merges` (optional) receives the count.
std::vector<double> dynamic_algorithm(std::span<const ScalarTerm> terms,
                                      std::vector<double> prices, double price_cap,
                                      int* merges = nullptr);

// Closed-form optimal fees for critical type m (1-based, K+1 = all Linus)
// and a nondecreasing Bill price vector (length K-m+1). The type-m IR and
// every adjacent downward IC bind exactly.
std::vector<double> optimal_fees(const Population& pop, int m,
                                 const std::vector<double>& prices, double p0);

// The separable f_k terms for a given critical type (m <= K) and Linus price.
SeparableObjective build_objective(const Population& pop, int m, double p0);

struct SolveReport {
    Contract contract;
    double exact_profit = 0.0;       // operator_profit, authoritative
    double decomposed_profit = 0.0;  // Linus term + sum f_k at returned prices
    double dual_upper_bound = 0.0;   // on the decomposed objective
    double dynamic_lower_bound = 0.0;
    int m_star = 1;  // 1-based critical type
    long iterations = 0;
    bool dual_converged = true;
    std::vector<double> per_type_payoffs;
    double decomposition_gap = 0.0;  // exact Bill profit - sum f_k
};

SolveReport solve_given_m(const Population& pop, int m,
                          double epsilon = kDefaultEpsilon);

// Exhaustive search over m in {1..K+1}; ties go to the smaller m.
SolveReport solve(const Population& pop, double epsilon = kDefaultEpsilon);

}  // namespace apmarket
