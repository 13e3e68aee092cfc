#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "acceptance_suite.hpp"
#include "cli.hpp"

namespace {

using epic::cli::RunConfig;

/// --config is read before the other flags so that flags override file values.
std::string find_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

void add_common(CLI::App* app, RunConfig& cfg, std::string& config_path) {
    app->add_option("--config", config_path, "JSON file with defaults for any flag");
    app->add_option("--out", cfg.out, "Write output to this file instead of stdout");
    app->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app->add_option("--seed", cfg.seed, "Base random seed");
    app->add_option("--discount", cfg.discount, "Discount factor override");
}

void add_distance_flags(CLI::App* app, RunConfig& cfg) {
    app->add_option("--method", cfg.method, "epic, npec, erc, ddsr or direct");
    app->add_option("--env", cfg.env, "gridworld[:NxN][:slippery[=p]], pointmass, or a JSON MDP file");
    app->add_option("--coverage", cfg.coverage,
                    "uniform, uniform-sas, random-policy-rollouts, or a JSON coverage file");
    app->add_option("--nv", cfg.nv, "Transition samples per seed (N_V)");
    app->add_option("--nm", cfg.nm, "Mean-estimation samples per seed (N_M)");
    app->add_option("--seeds", cfg.seeds, "Number of seeds");
    app->add_option("--episodes", cfg.episodes, "Episodes for ERC");
    app->add_option("--horizon", cfg.horizon, "Episode length for ERC");
    app->add_option("--p", cfg.p, "Exponent of the L^p distance (npec, ddsr, direct)");
    app->add_flag("--quick", cfg.quick, "Use N_V = N_M = 4096 and 4096 episodes");
    app->add_flag("--sampled", cfg.sampled, "Use sample-based estimators on tabular environments");
    app->add_option("--bootstrap", cfg.bootstrap, "Bootstrap resamples");
    app->add_option("--npec-steps", cfg.npec_steps, "Optimizer steps for sampled NPEC");
    app->add_option("--coverage-episodes", cfg.coverage_episodes, "Rollouts for rollout coverage");
    app->add_option("--coverage-horizon", cfg.coverage_horizon, "Rollout length for rollout coverage");
}

int emit(const epic::cli::CommandOutput& out, const RunConfig& cfg) {
    for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
    if (cfg.out.empty()) {
        std::cout << out.text;
    } else {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot write '" << cfg.out << "'\n";
            return epic::cli::kExitError;
        }
        f << out.text;
    }
    return out.exit_code;
}

/// Text mode prints each line as soon as its criterion finishes.
int run_acceptance(const std::vector<int>& which, const std::string& format) {
    const bool text = format == "text";
    const auto results = epic::acceptance::run(which, [&](const epic::acceptance::CriterionResult& r) {
        if (text) std::cout << epic::acceptance::format_line(r) << std::endl;
    });
    std::size_t passed = 0;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : results) {
        passed += r.pass;
        rows.push_back({{"criterion", r.index}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    }
    if (text) {
        std::cout << passed << " of " << results.size() << " criteria passed\n";
    } else {
        nlohmann::json j{{"version", epic::cli::kVersion}, {"command", "acceptance"}, {"criteria", rows},
                         {"summary", {{"run", results.size()}, {"passed", passed}}}};
        std::cout << j.dump(2) << "\n";
    }
    return passed == results.size() ? 0 : epic::cli::kExitViolation;
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        if (const auto path = find_config_path(argc, argv); !path.empty()) {
            std::ifstream in(path);
            if (!in) throw epic::ValidationError("cannot open config '" + path + "'");
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw epic::ValidationError("malformed config '" + path + "': " + e.what());
            }
            epic::cli::apply_config_json(cfg, j);
        }
    } catch (const epic::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return epic::cli::kExitError;
    }

    CLI::App app{"Reward function distances: EPIC, NPEC, ERC, DDSR and direct L^p"};
    app.set_version_flag("--version", epic::cli::kVersion);
    app.require_subcommand(1);
    std::string config_path;

    auto* distance = app.add_subcommand("distance", "Distance between two rewards");
    add_common(distance, cfg, config_path);
    add_distance_flags(distance, cfg);
    distance->add_option("--a", cfg.a, "First reward name");
    distance->add_option("--b", cfg.b, "Second reward name");

    auto* matrix = app.add_subcommand("matrix", "Pairwise distances over a list of rewards");
    add_common(matrix, cfg, config_path);
    add_distance_flags(matrix, cfg);
    matrix->add_option("--rewards", cfg.rewards, "Reward names")->delimiter(',');

    auto* regret = app.add_subcommand("regret-suite", "Check the regret bound on random MDPs");
    add_common(regret, cfg, config_path);
    regret->add_option("--instances", cfg.instances, "Number of random MDPs");
    regret->add_option("--max-states", cfg.max_states, "Largest state count");
    regret->add_option("--max-actions", cfg.max_actions, "Largest action count");

    auto* acceptance = app.add_subcommand("acceptance", "Run the acceptance criteria");
    std::vector<int> criteria;
    std::string acceptance_format = "text";
    acceptance->add_option("--criterion", criteria, "Criterion numbers to run (default: all)")
        ->delimiter(',')
        ->check(CLI::Range(1, epic::acceptance::kCriteria));
    acceptance->add_option("--format", acceptance_format, "Output format")
        ->check(CLI::IsMember({"text", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (distance->parsed()) return emit(epic::cli::cmd_distance(cfg), cfg);
        if (matrix->parsed()) return emit(epic::cli::cmd_matrix(cfg), cfg);
        if (acceptance->parsed()) return run_acceptance(criteria, acceptance_format);
        return emit(epic::cli::cmd_regret_suite(cfg), cfg);
    } catch (const epic::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return epic::cli::kExitError;
    }
}
