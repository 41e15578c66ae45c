#pragma once

// Config-driven experiment harness: declarative scenario files, APO count
// shaping, parameter sweeps, and deterministic CSV emission.

#include <string>
#include <vector>

#include "apmarket/market.hpp"

namespace apmarket::bench {

enum class Distribution { uniform, low_dominant, medium_dominant, high_dominant };

// Throws std::invalid_argument on an unknown name.
Distribution parse_distribution(const std::string& name);
std::string distribution_name(Distribution d);

// Triangular masses over the K types (uniform / skewed toward low, middle
// or high types), normalized so they sum to `total` with every entry >= 1.
std::vector<double> shape_counts(Distribution d, int k_types, double total);

struct Scenario {
    std::string name = "scenario";
    bool hetero = false;
    Distribution distribution = Distribution::uniform;
    double total = 0.0;      // N, the APO population size
    double n_aliens = 0.0;
    int k_types = 0;
    std::vector<double> qualities;  // explicit, or linspace(theta_min, theta_max)
    double eta = 0.5;               // homogeneous mobility
    std::vector<double> etas;       // heterogeneous mobility levels
    double period = 1.0;
    double price_cap = 0.0;
    std::string sweep_param;        // "", "n_aliens" or "eta_1"
    std::vector<double> sweep_values;
    double epsilon = 1e-4;
    int oracle_grid = 101;

    Population population() const;
    HeteroPopulation hetero_population() const;
};

struct ParseResult {
    Scenario scenario;
    std::vector<std::string> errors;  // "line N: section.key: message"
    bool ok() const { return errors.empty(); }
};

// Sectioned key=value config; see configs/ for the documented schema.
ParseResult parse_config(const std::string& path);

// Canonical echo of the effective configuration (used by `validate`).
std::string normalized_config(const Scenario& sc);

struct RunOptions {
    std::string out_dir = ".";
    int jobs = 1;
    bool use_oracle = false;  // additionally emit a grid-search comparison
    bool timing = false;      // real wall_ms (breaks byte determinism)
    double epsilon_override = 0.0;  // > 0 replaces the scenario epsilon
};

// Runs every sweep point, re-checks feasibility of each emitted contract and
// writes <name>_summary.csv plus one contract table per point (temp file +
// atomic rename; never a partial file). Returns 0 on success, 3 on a solver
// or feasibility error (message in *error).
int run_scenario(const Scenario& sc, const RunOptions& opt, std::string* error);

// 12-significant-digit formatting shared by all CSV output.
std::string format_number(double v);

}  // namespace apmarket::bench
