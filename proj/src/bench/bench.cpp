#include "apmarket/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "apmarket/feasibility.hpp"
#include "apmarket/hetero_solver.hpp"
#include "apmarket/oracle.hpp"
#include "apmarket/solver.hpp"

namespace apmarket::bench {

Distribution parse_distribution(const std::string& name) {
    if (name == "uniform") return Distribution::uniform;
    if (name == "low-dominant") return Distribution::low_dominant;
    if (name == "medium-dominant") return Distribution::medium_dominant;
    if (name == "high-dominant") return Distribution::high_dominant;
    throw std::invalid_argument("unknown distribution: " + name);
}

std::string distribution_name(Distribution d) {
    switch (d) {
        case Distribution::uniform: return "uniform";
        case Distribution::low_dominant: return "low-dominant";
        case Distribution::medium_dominant: return "medium-dominant";
        case Distribution::high_dominant: return "high-dominant";
    }
    return "uniform";
}

std::vector<double> shape_counts(Distribution d, int k_types, double total) {
    if (k_types < 1) throw std::invalid_argument("shape_counts: k_types must be >= 1");
    if (total < k_types)
        throw std::invalid_argument("shape_counts: total must cover one APO per type");
    std::vector<double> w(k_types);
    for (int k = 0; k < k_types; ++k) {
        switch (d) {
            case Distribution::uniform: w[k] = 1.0; break;
            case Distribution::low_dominant: w[k] = k_types - k; break;
            case Distribution::medium_dominant:
                w[k] = std::min(k + 1, k_types - k);
                break;
            case Distribution::high_dominant: w[k] = k + 1; break;
        }
    }
    double wsum = 0.0;
    for (double x : w) wsum += x;

    // largest-remainder rounding to integers summing to `total`
    std::vector<double> counts(k_types);
    std::vector<std::pair<double, int>> frac(k_types);
    double assigned = 0.0;
    for (int k = 0; k < k_types; ++k) {
        const double exact = total * w[k] / wsum;
        counts[k] = std::floor(exact);
        frac[k] = {exact - counts[k], k};
        assigned += counts[k];
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int i = 0; assigned + 0.5 < total; ++i, assigned += 1.0)
        counts[frac[i % k_types].second] += 1.0;

    // keep every type populated, stealing from the largest bucket
    for (int k = 0; k < k_types; ++k)
        while (counts[k] < 1.0) {
            const int big = static_cast<int>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            counts[big] -= 1.0;
            counts[k] += 1.0;
        }
    return counts;
}

Population Scenario::population() const {
    Population pop;
    pop.qualities = qualities;
    pop.counts = shape_counts(distribution, k_types, total);
    pop.eta = eta;
    pop.n_aliens = n_aliens;
    pop.period = period;
    pop.price_cap = price_cap;
    return pop;
}

HeteroPopulation Scenario::hetero_population() const {
    HeteroPopulation pop;
    pop.qualities = qualities;
    pop.etas = etas;
    const std::vector<double> masses = shape_counts(distribution, k_types, total);
    const int ll = static_cast<int>(etas.size());
    pop.counts.assign(k_types, std::vector<double>(ll, 0.0));
    for (int k = 0; k < k_types; ++k)
        for (int l = 0; l < ll; ++l) pop.counts[k][l] = masses[k] / ll;
    pop.n_aliens = n_aliens;
    pop.period = period;
    pop.price_cap = price_cap;
    return pop;
}

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
};
using RawConfig = std::map<std::string, RawEntry>;  // "section.key" -> value

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument("not a number: " + tok);
    }
    return out;
}

class ConfigReader {
  public:
    ConfigReader(RawConfig raw, std::vector<std::string>& errors)
        : raw_(std::move(raw)), errors_(errors) {}

    bool has(const std::string& key) const { return raw_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        auto it = raw_.find(key);
        if (it == raw_.end()) return fallback;
        seen_.insert(key);
        return it->second.value;
    }

    double num(const std::string& key, double fallback, bool required = false) {
        auto it = raw_.find(key);
        if (it == raw_.end()) {
            if (required) errors_.push_back("missing required field: " + key);
            return fallback;
        }
        seen_.insert(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second.value, &used);
            if (used != it->second.value.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            fail(it->second.line, key, "not a number: " + it->second.value);
            return fallback;
        }
    }

    std::vector<double> list(const std::string& key) {
        auto it = raw_.find(key);
        if (it == raw_.end()) return {};
        seen_.insert(key);
        try {
            return parse_list(it->second.value);
        } catch (const std::exception& e) {
            fail(it->second.line, key, e.what());
            return {};
        }
    }

    void fail(int line, const std::string& key, const std::string& msg) {
        errors_.push_back("line " + std::to_string(line) + ": " + key + ": " + msg);
    }

    void fail(const std::string& key, const std::string& msg) {
        auto it = raw_.find(key);
        fail(it == raw_.end() ? 0 : it->second.line, key, msg);
    }

    void flag_unknown() {
        for (const auto& [key, entry] : raw_)
            if (!seen_.count(key)) fail(entry.line, key, "unknown field");
    }

  private:
    RawConfig raw_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

}  // namespace

ParseResult parse_config(const std::string& path) {
    ParseResult res;
    std::ifstream in(path);
    if (!in) {
        res.errors.push_back("cannot open config file: " + path);
        return res;
    }

    RawConfig raw;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                res.errors.push_back("line " + std::to_string(lineno) +
                                     ": malformed section header: " + t);
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            res.errors.push_back("line " + std::to_string(lineno) +
                                 ": expected key = value: " + t);
            continue;
        }
        const std::string key = section + "." + trim(t.substr(0, eq));
        if (raw.count(key)) {
            res.errors.push_back("line " + std::to_string(lineno) + ": " + key +
                                 ": duplicate key");
            continue;
        }
        raw[key] = {trim(t.substr(eq + 1)), lineno};
    }

    ConfigReader cfg(std::move(raw), res.errors);
    Scenario& sc = res.scenario;

    sc.name = cfg.str("scenario.name", "");
    if (sc.name.empty()) res.errors.push_back("missing required field: scenario.name");
    const std::string kind = cfg.str("scenario.kind", "homogeneous");
    if (kind == "homogeneous")
        sc.hetero = false;
    else if (kind == "heterogeneous")
        sc.hetero = true;
    else
        cfg.fail("scenario.kind", "must be homogeneous or heterogeneous");
    try {
        sc.distribution = parse_distribution(cfg.str("scenario.distribution", "uniform"));
    } catch (const std::exception& e) {
        cfg.fail("scenario.distribution", e.what());
    }

    sc.total = cfg.num("population.n", 0.0, true);
    sc.n_aliens = cfg.num("population.n_aliens", 0.0);
    sc.k_types = static_cast<int>(cfg.num("population.k", 0.0, true));
    sc.period = cfg.num("population.period", 1.0);
    sc.price_cap = cfg.num("population.price_cap", 0.0, true);
    if (cfg.has("population.qualities")) {
        sc.qualities = cfg.list("population.qualities");
        if (static_cast<int>(sc.qualities.size()) != sc.k_types)
            cfg.fail("population.qualities", "needs exactly k entries");
    } else {
        const double lo = cfg.num("population.theta_min", 1.0);
        const double hi = cfg.num("population.theta_max", static_cast<double>(sc.k_types));
        for (int k = 0; k < sc.k_types; ++k)
            sc.qualities.push_back(
                sc.k_types == 1 ? lo : lo + (hi - lo) * k / (sc.k_types - 1));
    }
    for (std::size_t k = 0; k < sc.qualities.size(); ++k) {
        if (sc.qualities[k] <= 0.0) {
            cfg.fail("population.qualities", "qualities must be positive");
            break;
        }
        if (k > 0 && sc.qualities[k] <= sc.qualities[k - 1]) {
            cfg.fail("population.qualities", "qualities must be strictly increasing");
            break;
        }
    }
    if (sc.hetero) {
        sc.etas = cfg.list("population.etas");
        if (sc.etas.empty()) res.errors.push_back("missing required field: population.etas");
        for (std::size_t l = 0; l < sc.etas.size(); ++l) {
            if (sc.etas[l] < 0.0 || sc.etas[l] > 1.0) {
                cfg.fail("population.etas", "etas must be in [0,1]");
                break;
            }
            if (l > 0 && sc.etas[l] <= sc.etas[l - 1]) {
                cfg.fail("population.etas", "etas must be strictly increasing");
                break;
            }
        }
    } else {
        sc.eta = cfg.num("population.eta", 0.5);
        if (sc.eta < 0.0 || sc.eta > 1.0) cfg.fail("population.eta", "must be in [0,1]");
    }
    if (sc.k_types < 1) cfg.fail("population.k", "must be >= 1");
    if (sc.total < sc.k_types) cfg.fail("population.n", "must cover one APO per type");
    if (sc.n_aliens < 0.0) cfg.fail("population.n_aliens", "must be >= 0");
    if (sc.price_cap <= 0.0) cfg.fail("population.price_cap", "must be positive");
    if (sc.period <= 0.0) cfg.fail("population.period", "must be positive");

    sc.sweep_param = cfg.str("sweep.parameter", "");
    sc.sweep_values = cfg.list("sweep.values");
    if (!sc.sweep_param.empty()) {
        if (sc.sweep_param != "n_aliens" && sc.sweep_param != "eta_1")
            cfg.fail("sweep.parameter", "must be n_aliens or eta_1");
        if (sc.sweep_param == "eta_1" && !sc.hetero)
            cfg.fail("sweep.parameter", "eta_1 requires a heterogeneous scenario");
        if (sc.sweep_values.empty())
            cfg.fail("sweep.values", "a sweep needs at least one value");
        for (double v : sc.sweep_values)
            if (!std::isfinite(v) || v < 0.0) {
                cfg.fail("sweep.values", "values must be finite and >= 0");
                break;
            }
        if (sc.sweep_param == "eta_1" && sc.etas.size() >= 2)
            for (double v : sc.sweep_values)
                if (v >= sc.etas[1]) {
                    cfg.fail("sweep.values", "eta_1 must stay below eta_2");
                    break;
                }
    } else if (!sc.sweep_values.empty()) {
        cfg.fail("sweep.values", "sweep.parameter missing");
    }

    sc.epsilon = cfg.num("solver.epsilon", 1e-4);
    if (!(sc.epsilon > 0.0 && sc.epsilon < 1.0))
        cfg.fail("solver.epsilon", "must be in (0,1)");
    sc.oracle_grid = static_cast<int>(cfg.num("solver.oracle_grid", 101.0));
    if (sc.oracle_grid < 2) cfg.fail("solver.oracle_grid", "must be >= 2");

    cfg.flag_unknown();
    return res;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string normalized_config(const Scenario& sc) {
    std::ostringstream out;
    out << "[scenario]\n";
    out << "name = " << sc.name << "\n";
    out << "kind = " << (sc.hetero ? "heterogeneous" : "homogeneous") << "\n";
    out << "distribution = " << distribution_name(sc.distribution) << "\n";
    out << "[population]\n";
    out << "n = " << format_number(sc.total) << "\n";
    out << "n_aliens = " << format_number(sc.n_aliens) << "\n";
    out << "k = " << sc.k_types << "\n";
    out << "qualities = ";
    for (std::size_t k = 0; k < sc.qualities.size(); ++k)
        out << (k ? "," : "") << format_number(sc.qualities[k]);
    out << "\n";
    if (sc.hetero) {
        out << "etas = ";
        for (std::size_t l = 0; l < sc.etas.size(); ++l)
            out << (l ? "," : "") << format_number(sc.etas[l]);
        out << "\n";
    } else {
        out << "eta = " << format_number(sc.eta) << "\n";
    }
    out << "period = " << format_number(sc.period) << "\n";
    out << "price_cap = " << format_number(sc.price_cap) << "\n";
    if (!sc.sweep_param.empty()) {
        out << "[sweep]\n";
        out << "parameter = " << sc.sweep_param << "\n";
        out << "values = ";
        for (std::size_t i = 0; i < sc.sweep_values.size(); ++i)
            out << (i ? "," : "") << format_number(sc.sweep_values[i]);
        out << "\n";
    }
    out << "[solver]\n";
    out << "epsilon = " << format_number(sc.epsilon) << "\n";
    out << "oracle_grid = " << sc.oracle_grid << "\n";
    return out.str();
}

namespace {

struct PointResult {
    std::string summary_row;
    std::string contract_csv;
    std::string oracle_row;
    bool failed = false;
    std::string error;
};

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

PointResult run_point(const Scenario& sc, double sweep_value, bool has_sweep,
                      const RunOptions& opt) {
    PointResult pr;
    const double epsilon =
        opt.epsilon_override > 0.0 ? opt.epsilon_override : sc.epsilon;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        std::ostringstream row;
        std::ostringstream table;
        if (!sc.hetero) {
            Population pop = sc.population();
            if (has_sweep) pop.n_aliens = sweep_value;  // only homo sweep parameter
            pop.validate();
            const SolveReport rep = solve(pop, epsilon);
            const FeasibilityReport feas = check_theorem1(pop, rep.contract);
            if (!feas.is_feasible)
                throw std::runtime_error("solver returned an infeasible contract");

            const auto t1 = std::chrono::steady_clock::now();
            const double wall_ms =
                opt.timing
                    ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                    : 0.0;
            row << sc.name << ',' << (has_sweep ? sc.sweep_param : "none") << ','
                << format_number(sweep_value) << ',' << rep.m_star << ','
                << format_number(rep.contract.linus_price) << ','
                << format_number(rep.exact_profit) << ','
                << format_number(rep.exact_profit / (pop.total_apos() + pop.n_aliens))
                << ',' << format_number(rep.dual_upper_bound) << ','
                << format_number(rep.dynamic_lower_bound) << ','
                << format_number(rep.decomposition_gap) << ',' << rep.iterations << ','
                << format_number(wall_ms);
            for (double u : rep.per_type_payoffs) row << ',' << format_number(u);

            table << "type,price,fee,payoff\n";
            for (int k = 0; k < pop.type_count(); ++k)
                table << (k + 1) << ',' << format_number(rep.contract.items[k].price)
                      << ',' << format_number(rep.contract.items[k].fee) << ','
                      << format_number(rep.per_type_payoffs[k]) << "\n";

            if (opt.use_oracle) {
                const GridSearchResult g =
                    grid_search_contract(pop, GridSpec{sc.oracle_grid, true});
                pr.oracle_row = sc.name + "," + format_number(sweep_value) + "," +
                                format_number(g.profit) + "," +
                                format_number(rep.exact_profit) + "\n";
            }
        } else {
            HeteroPopulation pop = sc.hetero_population();
            if (has_sweep) {
                if (sc.sweep_param == "eta_1")
                    pop.etas[0] = sweep_value;
                else
                    pop.n_aliens = sweep_value;
            }
            pop.validate();
            const HeteroSolveReport rep = hetero_solve(pop, epsilon);
            const HeteroFeasibilityReport feas = check_theorem2_hetero(pop, rep.contract);
            if (!feas.is_feasible)
                throw std::runtime_error("solver returned an infeasible contract");

            const auto t1 = std::chrono::steady_clock::now();
            const double wall_ms =
                opt.timing
                    ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                    : 0.0;
            std::string mvec;
            for (std::size_t l = 0; l < rep.m_star.size(); ++l)
                mvec += (l ? "|" : "") + std::to_string(rep.m_star[l]);
            row << sc.name << ',' << (has_sweep ? sc.sweep_param : "none") << ','
                << format_number(sweep_value) << ',' << mvec << ','
                << format_number(rep.contract.linus_price) << ','
                << format_number(rep.exact_profit) << ','
                << format_number(rep.exact_profit / (pop.total_apos() + pop.n_aliens))
                << ',' << format_number(rep.dual_upper_bound) << ','
                << format_number(rep.dynamic_lower_bound) << ','
                << format_number(rep.decomposition_gap) << ',' << rep.iterations << ','
                << format_number(wall_ms);
            for (int k = 0; k < pop.type_count(); ++k)
                for (int l = 0; l < pop.mobility_count(); ++l)
                    row << ',' << format_number(rep.per_type_payoffs[k][l]);

            table << "type,level,price,fee,payoff\n";
            for (int k = 0; k < pop.type_count(); ++k)
                for (int l = 0; l < pop.mobility_count(); ++l)
                    table << (k + 1) << ',' << (l + 1) << ','
                          << format_number(rep.contract.items[k][l].price) << ','
                          << format_number(rep.contract.items[k][l].fee) << ','
                          << format_number(rep.per_type_payoffs[k][l]) << "\n";
        }
        pr.summary_row = row.str() + "\n";
        pr.contract_csv = table.str();
    } catch (const std::exception& e) {
        pr.failed = true;
        pr.error = e.what();
    }
    return pr;
}

}  // namespace

int run_scenario(const Scenario& sc, const RunOptions& opt, std::string* error) {
    std::vector<double> values = sc.sweep_values;
    const bool has_sweep = !sc.sweep_param.empty();
    if (!has_sweep) values = {0.0};

    std::vector<PointResult> results(values.size());
    const int jobs = std::max(1, opt.jobs);
    if (jobs == 1 || values.size() <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i)
            results[i] = run_point(sc, values[i], has_sweep, opt);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < values.size(); i += jobs)
                    results[i] = run_point(sc, values[i], has_sweep, opt);
            });
        for (std::thread& t : pool) t.join();
    }

    for (const PointResult& pr : results)
        if (pr.failed) {
            if (error) *error = pr.error;
            return 3;
        }

    std::filesystem::path dir(opt.out_dir);
    std::filesystem::create_directories(dir);

    std::string summary = "scenario,sweep_param,sweep_value,m_star,p0,profit,"
                          "profit_per_user,dual_ub,dynamic_lb,decomposition_gap,"
                          "iterations,wall_ms";
    if (!sc.hetero) {
        for (int k = 1; k <= sc.k_types; ++k)
            summary += ",payoff_" + std::to_string(k);
    } else {
        for (int k = 1; k <= sc.k_types; ++k)
            for (std::size_t l = 1; l <= sc.etas.size(); ++l)
                summary += ",payoff_" + std::to_string(k) + "_" + std::to_string(l);
    }
    summary += "\n";
    for (const PointResult& pr : results) summary += pr.summary_row;
    atomic_write(dir / (sc.name + "_summary.csv"), summary);

    for (std::size_t i = 0; i < results.size(); ++i)
        atomic_write(dir / (sc.name + "_point" + std::to_string(i) + "_contract.csv"),
                     results[i].contract_csv);

    if (opt.use_oracle && !sc.hetero) {
        std::string oracle = "scenario,sweep_value,oracle_profit,solver_profit\n";
        for (const PointResult& pr : results) oracle += pr.oracle_row;
        atomic_write(dir / (sc.name + "_oracle.csv"), oracle);
    }
    return 0;
}

}  // namespace apmarket::bench
