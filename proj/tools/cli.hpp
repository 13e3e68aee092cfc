#pragma once

// Command implementations behind the `epic` executable. main.cpp only parses
// flags; everything here takes a RunConfig and returns rendered output, so the
// commands are testable without spawning processes.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "epic/epic.hpp"

namespace epic::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    std::string method = "epic";
    std::string env = "gridworld";
    std::string a;
    std::string b;
    std::vector<std::string> rewards;
    std::string coverage = "uniform";
    std::optional<double> discount;
    std::optional<Eigen::Index> nv;
    std::optional<Eigen::Index> nm;
    std::optional<std::size_t> seeds;
    std::optional<std::size_t> episodes;
    std::optional<Eigen::Index> horizon;
    double p = 2.0;
    bool quick = false;
    /// Use the sample-based estimators even when an exact tabular path exists.
    bool sampled = false;
    std::string out;
    std::string format = "json";
    std::uint64_t seed = 0;
    std::size_t bootstrap = 10000;
    std::optional<std::size_t> npec_steps;
    std::size_t coverage_episodes = 1000;
    Eigen::Index coverage_horizon = 100;
    std::size_t instances = 100;
    std::size_t max_states = 8;
    std::size_t max_actions = 4;
};

struct CommandOutput {
    std::string text;
    int exit_code = 0;
    /// Human-readable notes for stderr, e.g. failed matrix cells.
    std::vector<std::string> warnings;
};

inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 3;

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

/// Applies the keys of a JSON config object; flag names with '-' become '_'.
inline void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "method") cfg.method = v.get<std::string>();
            else if (key == "env") cfg.env = v.get<std::string>();
            else if (key == "a") cfg.a = v.get<std::string>();
            else if (key == "b") cfg.b = v.get<std::string>();
            else if (key == "rewards") {
                if (v.is_string()) {
                    cfg.rewards.clear();
                    std::stringstream ss(v.get<std::string>());
                    for (std::string item; std::getline(ss, item, ',');) cfg.rewards.push_back(item);
                } else {
                    cfg.rewards = v.get<std::vector<std::string>>();
                }
            } else if (key == "coverage") cfg.coverage = v.get<std::string>();
            else if (key == "discount") cfg.discount = v.get<double>();
            else if (key == "nv") cfg.nv = v.get<Eigen::Index>();
            else if (key == "nm") cfg.nm = v.get<Eigen::Index>();
            else if (key == "seeds") cfg.seeds = v.get<std::size_t>();
            else if (key == "episodes") cfg.episodes = v.get<std::size_t>();
            else if (key == "horizon") cfg.horizon = v.get<Eigen::Index>();
            else if (key == "p") cfg.p = v.get<double>();
            else if (key == "quick") cfg.quick = v.get<bool>();
            else if (key == "sampled") cfg.sampled = v.get<bool>();
            else if (key == "out") cfg.out = v.get<std::string>();
            else if (key == "format") cfg.format = v.get<std::string>();
            else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
            else if (key == "bootstrap") cfg.bootstrap = v.get<std::size_t>();
            else if (key == "npec_steps") cfg.npec_steps = v.get<std::size_t>();
            else if (key == "coverage_episodes") cfg.coverage_episodes = v.get<std::size_t>();
            else if (key == "coverage_horizon") cfg.coverage_horizon = v.get<Eigen::Index>();
            else if (key == "instances") cfg.instances = v.get<std::size_t>();
            else if (key == "max_states") cfg.max_states = v.get<std::size_t>();
            else if (key == "max_actions") cfg.max_actions = v.get<std::size_t>();
            else throw ValidationError("config: unknown key '" + key + "'");
        } catch (const nlohmann::json::exception&) {
            throw ValidationError("config: key '" + key + "' has the wrong type");
        }
    }
}

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

struct Environment {
    std::string name;
    double discount = 0.99;
    std::optional<TabularMdp> mdp;
    std::map<std::string, RewardTable> tables;
    std::optional<PointMassConfig> pointmass;
    std::map<std::string, RewardFunction> functions;

    bool tabular() const { return mdp.has_value(); }

    std::vector<std::string> reward_names() const {
        std::vector<std::string> out;
        if (tabular())
            for (const auto& [n, r] : tables) out.push_back(n);
        else
            for (const auto& [n, r] : functions) out.push_back(n);
        return out;
    }

    void require_reward(const std::string& name) const {
        const bool known = tabular() ? tables.count(name) > 0 : functions.count(name) > 0;
        if (known) return;
        std::string list;
        for (const auto& n : reward_names()) list += (list.empty() ? "" : ", ") + n;
        throw ValidationError("unknown reward '" + name + "' for environment '" + this->name +
                              "' (available: " + list + ")");
    }

    RewardFunction function(const std::string& name) const {
        require_reward(name);
        if (tabular()) return tabular_reward_function(tables.at(name), name);
        return functions.at(name);
    }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
    return out;
}

inline double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ValidationError("cannot parse " + what + " '" + s + "'");
    return v;
}

inline void check_discount(double g) {
    if (!(g >= 0.0 && g <= 1.0)) throw ValidationError("discount must lie in [0, 1]");
}

} // namespace detail

/// `gridworld[:NxN][:slippery[=p]]`, `pointmass`, or a path to a JSON MDP file.
inline Environment load_environment(const std::string& spec,
                                    std::optional<double> discount_override) {
    if (discount_override) detail::check_discount(*discount_override);
    Environment env;
    env.name = spec;
    const auto parts = detail::split(spec, ':');
    if (!parts.empty() && parts[0] == "gridworld") {
        GridworldSpec gs;
        for (std::size_t i = 1; i < parts.size(); ++i) {
            const auto& tok = parts[i];
            if (tok.rfind("slippery", 0) == 0) {
                gs.slippery = true;
                if (tok.size() > 8) {
                    if (tok[8] != '=') throw ValidationError("bad gridworld option '" + tok + "'");
                    gs.p_slip = detail::parse_number(tok.substr(9), "slip probability");
                }
            } else if (const auto x = tok.find('x'); x != std::string::npos) {
                const double r = detail::parse_number(tok.substr(0, x), "grid size");
                const double c = detail::parse_number(tok.substr(x + 1), "grid size");
                if (r != c || r < 2 || r != std::floor(r))
                    throw ValidationError("gridworld size must be NxN with N >= 2, got '" + tok + "'");
                gs.side = std::size_t(r);
            } else {
                throw ValidationError("bad gridworld option '" + tok + "'");
            }
        }
        gs.discount = discount_override.value_or(0.99);
        if (gs.discount >= 1.0) throw ValidationError("gridworld discount must be < 1");
        env.discount = gs.discount;
        env.mdp = gridworld_mdp(gs);
        for (const auto& [name, family] : gridworld_reward_names())
            env.tables.emplace(name, gridworld_reward(gs.side, family, gs.discount));
        return env;
    }
    if (spec == "pointmass") {
        PointMassConfig pm;
        pm.discount = discount_override.value_or(pm.discount);
        env.discount = pm.discount;
        env.pointmass = pm;
        for (auto family : {PointMassReward::Sparse, PointMassReward::Dense, PointMassReward::Magnitude})
            for (bool ctrl : {false, true})
                env.functions.emplace(pointmass_reward_name(family, ctrl),
                                      pointmass_reward(pm, family, ctrl));
        return env;
    }
    if (!std::filesystem::exists(spec))
        throw ValidationError("unknown environment '" + spec +
                              "' (expected gridworld[:NxN][:slippery[=p]], pointmass, or a JSON file)");
    auto problem = load_tabular_problem(spec);
    env.discount = discount_override.value_or(problem.mdp.discount());
    env.mdp = std::move(problem.mdp);
    env.tables = std::move(problem.rewards);
    return env;
}

// ---------------------------------------------------------------------------
// Resolved plan
// ---------------------------------------------------------------------------

struct Plan {
    RunConfig cfg;
    Environment env;
    double discount = 0.0;
    Eigen::Index nv = 0;
    Eigen::Index nm = 0;
    std::size_t seeds = 0;
    std::size_t episodes = 0;
    Eigen::Index horizon = 0;
    std::optional<CoverageDistribution> coverage;
    std::optional<CoverageSampler> sampler;
    BootstrapConfig boot;
};

namespace detail {

/// Smallest H with discount^H <= 1e-12, so the shaping boundary term of a
/// truncated episode is negligible.
inline Eigen::Index default_horizon(double discount, bool tabular) {
    if (!tabular) return 100;
    if (discount == 0.0) return 1;
    if (discount >= 1.0) throw ValidationError("missing field 'horizon' (required when discount = 1)");
    return std::min<Eigen::Index>(20000, Eigen::Index(std::ceil(std::log(1e-12) / std::log(discount))));
}

inline void resolve_coverage(Plan& plan) {
    const auto& c = plan.cfg.coverage;
    auto& env = plan.env;
    if (env.tabular()) {
        const auto& mdp = *env.mdp;
        if (c == "uniform") {
            plan.coverage = CoverageDistribution::uniform_state_action(mdp);
        } else if (c == "uniform-sas") {
            plan.coverage = CoverageDistribution::uniform(mdp.shape());
        } else if (c == "random-policy-rollouts") {
            const auto eps = tabular_rollout(mdp, uniform_policy(mdp.n_states(), mdp.n_actions()),
                                             plan.cfg.coverage_horizon, plan.cfg.coverage_episodes,
                                             plan.cfg.seed ^ 0xc0feULL);
            plan.coverage = empirical_coverage(mdp.shape(), eps);
        } else if (std::filesystem::exists(c)) {
            plan.coverage = load_coverage(c, mdp.shape());
        } else {
            throw ValidationError("unknown coverage '" + c + "'");
        }
        plan.sampler = tabular_sampler(*plan.coverage);
        return;
    }
    const auto& pm = *env.pointmass;
    if (c == "uniform") {
        plan.sampler = pointmass_uniform_sampler(pm);
    } else if (c == "random-policy-rollouts") {
        const auto eps = pointmass_rollout(pm, pointmass_uniform_policy(pm), plan.cfg.coverage_horizon,
                                           plan.cfg.coverage_episodes, plan.cfg.seed ^ 0xc0feULL);
        plan.sampler = dataset_sampler(concatenate_transitions(eps));
    } else {
        throw ValidationError("coverage '" + c + "' is not available for pointmass");
    }
}

} // namespace detail

inline Plan make_plan(const RunConfig& cfg) {
    static const std::vector<std::string> methods{"epic", "npec", "erc", "ddsr", "direct"};
    if (std::find(methods.begin(), methods.end(), cfg.method) == methods.end())
        throw ValidationError("unknown method '" + cfg.method + "'");
    if (cfg.format != "json" && cfg.format != "csv")
        throw ValidationError("format must be 'json' or 'csv'");
    if (!(cfg.p >= 1.0)) throw ValidationError("p must be >= 1");
    Plan plan;
    plan.cfg = cfg;
    plan.env = load_environment(cfg.env, cfg.discount);
    plan.discount = plan.env.discount;
    const Eigen::Index n_default = cfg.quick ? 4096 : 32768;
    plan.nv = cfg.nv.value_or(n_default);
    plan.nm = cfg.nm.value_or(n_default);
    if (plan.nv < 2 || plan.nm < 2) throw ValidationError("nv and nm must be >= 2");
    plan.seeds = cfg.seeds.value_or(cfg.method == "npec" ? 3 : 30);
    plan.episodes = cfg.episodes.value_or(cfg.quick ? 4096 : 131072);
    plan.horizon = cfg.horizon.value_or(0);
    if (cfg.method == "erc" && !cfg.horizon)
        plan.horizon = detail::default_horizon(plan.discount, plan.env.tabular());
    if (cfg.method == "erc" && plan.horizon < 1) throw ValidationError("horizon must be >= 1");
    plan.boot.n_resamples = cfg.bootstrap;
    plan.boot.seed = cfg.seed;
    plan.boot.validate();
    detail::resolve_coverage(plan);
    return plan;
}

// ---------------------------------------------------------------------------
// Distance computation
// ---------------------------------------------------------------------------

namespace detail {

inline DistanceEstimate exact_estimate(const std::string& method, double value) {
    DistanceEstimate e;
    e.method = method;
    e.value = e.ci_lower = e.ci_upper = value;
    return e;
}

/// Returns of every requested reward on the same stream of episodes. Episodes
/// are generated and discarded in chunks to bound memory.
inline std::map<std::string, std::vector<double>> rollout_returns(const Plan& plan,
                                                                  const std::vector<std::string>& names) {
    std::map<std::string, std::vector<double>> out;
    std::vector<RewardFunction> fns;
    for (const auto& n : names) {
        fns.push_back(plan.env.function(n));
        out[n].reserve(plan.episodes);
    }
    constexpr std::size_t kChunk = 1024;
    for (std::size_t start = 0, chunk = 0; start < plan.episodes; start += kChunk, ++chunk) {
        const auto n = std::min(kChunk, plan.episodes - start);
        const std::uint64_t seed = plan.cfg.seed + (std::uint64_t(chunk) << 32);
        std::vector<Trajectory> eps;
        if (plan.env.tabular()) {
            const auto& mdp = *plan.env.mdp;
            eps = tabular_rollout(mdp, uniform_policy(mdp.n_states(), mdp.n_actions()), plan.horizon, n,
                                  seed);
        } else {
            const auto& pm = *plan.env.pointmass;
            eps = pointmass_rollout(pm, pointmass_uniform_policy(pm), plan.horizon, n, seed);
        }
        for (std::size_t k = 0; k < names.size(); ++k) {
            const auto g = episode_returns(eps, fns[k], plan.discount);
            auto& dst = out[names[k]];
            dst.insert(dst.end(), g.begin(), g.end());
        }
    }
    return out;
}

inline DistanceEstimate sampled_direct(const RewardFunction& a, const RewardFunction& b,
                                       const Plan& plan) {
    DistanceEstimate est;
    est.method = "direct";
    est.n_v = plan.nv;
    for (std::size_t s = 0; s < plan.seeds; ++s) {
        Rng rng = make_rng(plan.cfg.seed, s);
        const auto batch = plan.sampler->transitions(plan.nv, rng);
        const Eigen::VectorXd ra = a(batch), rb = b(batch);
        const std::vector<double> w(std::size_t(batch.size()), 1.0 / double(batch.size()));
        est.seed_values.push_back(weighted_lp({ra.data(), std::size_t(ra.size())},
                                              {rb.data(), std::size_t(rb.size())}, w, plan.cfg.p));
    }
    epic::detail::finish_seed_estimate(est, plan.boot);
    return est;
}

} // namespace detail

/// Distance from reward `a` to reward `b`. For ERC, `returns` supplies cached
/// episode returns by reward name.
inline DistanceEstimate compute_distance(const Plan& plan, const std::string& a, const std::string& b,
                                         const std::map<std::string, std::vector<double>>* returns = nullptr) {
    const auto& env = plan.env;
    env.require_reward(a);
    env.require_reward(b);
    const auto& m = plan.cfg.method;
    const bool exact = env.tabular() && !plan.cfg.sampled;

    if (m == "erc") {
        std::map<std::string, std::vector<double>> local;
        if (!returns) {
            local = detail::rollout_returns(plan, a == b ? std::vector<std::string>{a}
                                                         : std::vector<std::string>{a, b});
            returns = &local;
        }
        return erc_from_returns(returns->at(a), returns->at(b), a, b, plan.boot);
    }
    if (m == "epic") {
        if (exact) return detail::exact_estimate(m, epic_exact(env.tables.at(a), env.tables.at(b),
                                                               *plan.coverage, plan.discount));
        SampledEpicConfig sc;
        sc.n_v = plan.nv;
        sc.n_m = plan.nm;
        sc.n_seeds = plan.seeds;
        sc.seed = plan.cfg.seed;
        sc.bootstrap = plan.boot;
        return epic_sampled(env.function(a), env.function(b), *plan.sampler, plan.discount, sc);
    }
    if (m == "npec") {
        if (exact)
            return detail::exact_estimate(m, npec_normalized(env.tables.at(a), env.tables.at(b),
                                                             *plan.coverage, plan.discount, plan.cfg.p));
        if (plan.cfg.p != 2.0) throw ValidationError("sampled npec supports only p = 2");
        NpecApproxConfig nc;
        nc.n_seeds = plan.seeds;
        nc.seed = plan.cfg.seed;
        nc.bootstrap = plan.boot;
        nc.steps = plan.cfg.npec_steps;
        return npec_approx_gradient(env.function(a), env.function(b), *plan.sampler, plan.discount, nc);
    }
    if (m == "ddsr") {
        if (!env.tabular()) throw ValidationError("ddsr needs a tabular environment");
        return detail::exact_estimate(m, ddsr_distance(env.tables.at(a), env.tables.at(b),
                                                       *plan.coverage, plan.discount, plan.cfg.p));
    }
    // direct
    if (exact)
        return detail::exact_estimate(m, direct_distance_lp(env.tables.at(a), env.tables.at(b),
                                                            *plan.coverage, plan.cfg.p));
    return detail::sampled_direct(env.function(a), env.function(b), plan);
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string number(double v) { return nlohmann::json(v).dump(); }

inline nlohmann::json estimate_json(const DistanceEstimate& e) {
    nlohmann::json j;
    j["method"] = e.method;
    j["value"] = e.value;
    j["ci_lower"] = e.ci_lower;
    j["ci_upper"] = e.ci_upper;
    j["n_seeds"] = e.n_seeds;
    j["seed_values"] = e.seed_values;
    j["failures"] = e.failures;
    j["n_v"] = e.n_v;
    j["n_m"] = e.n_m;
    j["episodes"] = e.episodes;
    return j;
}

inline nlohmann::json plan_json(const Plan& plan) {
    nlohmann::json j;
    j["method"] = plan.cfg.method;
    j["env"] = plan.cfg.env;
    j["coverage"] = plan.cfg.coverage;
    j["discount"] = plan.discount;
    j["p"] = plan.cfg.p;
    j["seed"] = plan.cfg.seed;
    j["sampled"] = plan.cfg.sampled || !plan.env.tabular();
    j["nv"] = plan.nv;
    j["nm"] = plan.nm;
    j["seeds"] = plan.seeds;
    j["episodes"] = plan.episodes;
    j["horizon"] = plan.horizon;
    j["bootstrap_resamples"] = plan.boot.n_resamples;
    j["bootstrap_level"] = plan.boot.level;
    return j;
}

inline nlohmann::json header(const std::string& command) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["command"] = command;
    return j;
}

} // namespace detail

inline CommandOutput cmd_distance(const RunConfig& cfg) {
    if (cfg.a.empty()) throw ValidationError("missing field 'a'");
    if (cfg.b.empty()) throw ValidationError("missing field 'b'");
    const auto plan = make_plan(cfg);
    const auto est = compute_distance(plan, cfg.a, cfg.b);
    CommandOutput out;
    if (cfg.format == "csv") {
        out.text = "method,a,b,value,ci_lower,ci_upper\n" + est.method + "," + cfg.a + "," + cfg.b + "," +
                   detail::number(est.value) + "," + detail::number(est.ci_lower) + "," +
                   detail::number(est.ci_upper) + "\n";
    } else {
        auto j = detail::header("distance");
        j["config"] = detail::plan_json(plan);
        j["a"] = cfg.a;
        j["b"] = cfg.b;
        j["result"] = detail::estimate_json(est);
        out.text = j.dump(2) + "\n";
    }
    return out;
}

inline CommandOutput cmd_matrix(const RunConfig& cfg) {
    if (cfg.rewards.empty()) throw ValidationError("missing field 'rewards'");
    if (cfg.rewards.size() < 2) throw ValidationError("matrix needs at least 2 rewards");
    const auto plan = make_plan(cfg);
    for (const auto& r : cfg.rewards) plan.env.require_reward(r);

    std::map<std::string, std::vector<double>> returns;
    if (cfg.method == "erc") {
        std::vector<std::string> unique;
        for (const auto& r : cfg.rewards)
            if (std::find(unique.begin(), unique.end(), r) == unique.end()) unique.push_back(r);
        returns = detail::rollout_returns(plan, unique);
    }

    const auto n = cfg.rewards.size();
    CommandOutput out;
    std::vector<std::vector<std::optional<DistanceEstimate>>> cells(n, std::vector<std::optional<DistanceEstimate>>(n));
    std::vector<std::vector<std::string>> reasons(n, std::vector<std::string>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            try {
                cells[i][k] = compute_distance(plan, cfg.rewards[i], cfg.rewards[k],
                                               cfg.method == "erc" ? &returns : nullptr);
            } catch (const Error& e) {
                reasons[i][k] = e.what();
                out.warnings.push_back(cfg.rewards[i] + " vs " + cfg.rewards[k] + ": " + e.what());
                out.exit_code = kExitError;
            }
        }

    if (cfg.format == "csv") {
        std::string text = "reward";
        for (const auto& r : cfg.rewards) text += "," + r;
        text += "\n";
        for (std::size_t i = 0; i < n; ++i) {
            text += cfg.rewards[i];
            for (std::size_t k = 0; k < n; ++k)
                text += "," + (cells[i][k] ? detail::number(cells[i][k]->value) : std::string("null"));
            text += "\n";
        }
        out.text = std::move(text);
        return out;
    }
    auto j = detail::header("matrix");
    j["config"] = detail::plan_json(plan);
    j["rewards"] = cfg.rewards;
    nlohmann::json values = nlohmann::json::array(), details = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        nlohmann::json vrow = nlohmann::json::array(), drow = nlohmann::json::array();
        for (std::size_t k = 0; k < n; ++k) {
            if (cells[i][k]) {
                vrow.push_back(cells[i][k]->value);
                drow.push_back(detail::estimate_json(*cells[i][k]));
            } else {
                vrow.push_back(nullptr);
                drow.push_back({{"value", nullptr}, {"error", reasons[i][k]}});
            }
        }
        values.push_back(std::move(vrow));
        details.push_back(std::move(drow));
    }
    j["matrix"] = std::move(values);
    j["cells"] = std::move(details);
    out.text = j.dump(2) + "\n";
    return out;
}

/// Random instance kinds cycle through independent, perturbed and equivalent pairs.
inline CommandOutput cmd_regret_suite(const RunConfig& cfg) {
    if (cfg.max_states < 2) throw ValidationError("max_states must be >= 2");
    if (cfg.max_actions < 1) throw ValidationError("max_actions must be >= 1");
    const double g = cfg.discount.value_or(0.9);
    if (!(g >= 0.0 && g < 1.0)) throw ValidationError("regret-suite discount must lie in [0, 1)");
    static const char* kinds[] = {"independent", "perturbed", "equivalent"};

    nlohmann::json rows = nlohmann::json::array();
    std::size_t held = 0;
    for (std::size_t i = 0; i < cfg.instances; ++i) {
        Rng rng = make_rng(cfg.seed, i);
        const auto ns = std::uniform_int_distribution<std::size_t>(2, cfg.max_states)(rng);
        const auto na = std::uniform_int_distribution<std::size_t>(1, cfg.max_actions)(rng);
        const auto [mdp, a] = random_mdp(ns, na, g, rng());
        RewardTable b(a.shape());
        const auto kind = i % 3;
        std::normal_distribution<double> noise(0.0, 1.0);
        if (kind == 0) {
            b = random_mdp(ns, na, g, rng()).second;
        } else if (kind == 1) {
            for (std::size_t k = 0; k < b.size(); ++k) b.values()[k] = a.values()[k] + 0.1 * noise(rng);
        } else {
            std::vector<double> phi(ns);
            for (auto& v : phi) v = noise(rng);
            b = apply_equivalence(a, {std::uniform_real_distribution<double>(0.1, 10.0)(rng), phi}, g);
        }
        const auto rep = regret_bound_check(mdp, a, b);
        held += rep.holds;
        rows.push_back({{"index", i},
                        {"kind", kinds[kind]},
                        {"n_states", ns},
                        {"n_actions", na},
                        {"epic", rep.epic},
                        {"lhs", rep.lhs},
                        {"rhs", rep.rhs},
                        {"K", rep.coverage_constant},
                        {"reward_norm", rep.reward_norm},
                        {"degenerate", rep.degenerate},
                        {"holds", rep.holds}});
    }
    auto j = detail::header("regret-suite");
    j["config"] = {{"instances", cfg.instances},
                   {"max_states", cfg.max_states},
                   {"max_actions", cfg.max_actions},
                   {"discount", g},
                   {"seed", cfg.seed}};
    j["instances"] = std::move(rows);
    j["summary"] = {{"instances", cfg.instances}, {"held", held}, {"all_hold", held == cfg.instances}};
    CommandOutput out;
    out.text = j.dump(2) + "\n";
    if (held != cfg.instances) out.exit_code = kExitViolation;
    return out;
}

} // namespace epic::cli
