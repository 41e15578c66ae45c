// Command-line experiment harness around the contract solver library.
//
// Exit codes: 0 success, 2 config validation failure, 3 solver error.
// The APMARKET_EPSILON environment variable overrides the convergence
// tolerance from the config (CLI --epsilon wins over both).

#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "apmarket/bench.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

double env_epsilon() {
    const char* v = std::getenv("APMARKET_EPSILON");
    if (!v) return 0.0;
    try {
        return std::stod(v);
    } catch (const std::exception&) {
        return 0.0;
    }
}

int print_errors(const apmarket::bench::ParseResult& parsed) {
    for (const std::string& e : parsed.errors)
        std::fprintf(stderr, "config error: %s\n", e.c_str());
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"apmarket: profit-maximizing incentive-compatible Wi-Fi "
                 "crowdsourcing contracts"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;
    bool use_oracle = false;
    bool hetero_flag = false;
    bool timing = false;
    double epsilon = 0.0;

    CLI::App* solve = app.add_subcommand("solve", "run a scenario config");
    solve->add_option("config", config_path, "scenario config file")->required();
    solve->add_option("--out", out_dir, "output directory (default .)");
    solve->add_option("--jobs", jobs, "max concurrent sweep points");
    solve->add_flag("--oracle", use_oracle, "also run the grid-search oracle");
    solve->add_flag("--hetero", hetero_flag,
                    "require a heterogeneous scenario (sanity check)");
    solve->add_flag("--timing", timing,
                    "record real wall-clock times (breaks byte determinism)");
    solve->add_option("--epsilon", epsilon, "override convergence tolerance");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "check a config, no solve");
    validate->add_option("config", validate_path, "scenario config file")->required();

    CLI::App* version = app.add_subcommand("version", "print the version");

    CLI11_PARSE(app, argc, argv);

    if (version->parsed()) {
        std::printf("apmarket %s\n", kVersion);
        return 0;
    }

    if (validate->parsed()) {
        const auto parsed = apmarket::bench::parse_config(validate_path);
        if (!parsed.ok()) return print_errors(parsed);
        std::fputs(apmarket::bench::normalized_config(parsed.scenario).c_str(), stdout);
        return 0;
    }

    const auto parsed = apmarket::bench::parse_config(config_path);
    if (!parsed.ok()) return print_errors(parsed);
    if (hetero_flag && !parsed.scenario.hetero) {
        std::fprintf(stderr, "config error: scenario.kind: --hetero given but the "
                             "scenario is homogeneous\n");
        return 2;
    }

    apmarket::bench::RunOptions opt;
    opt.out_dir = out_dir;
    opt.jobs = jobs;
    opt.use_oracle = use_oracle;
    opt.timing = timing;
    opt.epsilon_override = epsilon > 0.0 ? epsilon : env_epsilon();

    std::string error;
    const int rc = apmarket::bench::run_scenario(parsed.scenario, opt, &error);
    if (rc != 0) std::fprintf(stderr, "solver error: %s\n", error.c_str());
    return rc;
}
