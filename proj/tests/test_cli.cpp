#include <gtest/gtest.h>

#include <filesystem>

#include "cli.hpp"

using namespace epic;
using namespace epic::cli;

namespace {

nlohmann::json run_json(const CommandOutput& out) { return nlohmann::json::parse(out.text); }

RunConfig base(const std::string& method = "epic") {
    RunConfig cfg;
    cfg.method = method;
    cfg.env = "gridworld:3x3";
    cfg.bootstrap = 200;
    return cfg;
}

std::string data(const std::string& name) {
    return (std::filesystem::path(EPIC_DATA_DIR) / name).string();
}

} // namespace

TEST(CliDistance, SparseAndDenseGoalAreEquivalent) {
    auto cfg = base();
    cfg.a = "sparse_goal";
    cfg.b = "dense_goal";
    const auto j = run_json(cmd_distance(cfg));
    EXPECT_LT(std::abs(j["result"]["value"].get<double>()), 1e-10);
    EXPECT_EQ(j["version"], kVersion);
}

TEST(CliDistance, ErcIsZeroForShapedPairWithFixedStart) {
    auto cfg = base("erc");
    cfg.a = "sparse_goal";
    cfg.b = "dense_goal";
    cfg.episodes = 256;
    const auto j = run_json(cmd_distance(cfg));
    EXPECT_LT(j["result"]["value"].get<double>(), 1e-6);
}

TEST(CliDistance, SelfDistanceIsZeroForEveryMethod) {
    for (const std::string m : {"epic", "npec", "erc", "ddsr", "direct"}) {
        auto cfg = base(m);
        cfg.a = cfg.b = "dirt_path";
        cfg.episodes = 64;
        cfg.horizon = 50;
        EXPECT_NEAR(run_json(cmd_distance(cfg))["result"]["value"].get<double>(), 0.0, 1e-12) << m;
    }
}

TEST(CliDistance, SampledEpicOnPointMass) {
    RunConfig cfg;
    cfg.env = "pointmass";
    cfg.a = "dense_no_ctrl";
    cfg.b = "sparse_no_ctrl";
    cfg.nv = cfg.nm = 512;
    cfg.seeds = 3;
    cfg.bootstrap = 100;
    cfg.coverage = "random-policy-rollouts";
    cfg.coverage_episodes = 50;
    const auto j = run_json(cmd_distance(cfg));
    EXPECT_LT(j["result"]["value"].get<double>(), 1e-3);
    EXPECT_EQ(j["result"]["seed_values"].size(), 3u);
}

TEST(CliDistance, Errors) {
    auto cfg = base();
    cfg.a = "sparse_goal";
    try {
        cmd_distance(cfg);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
    }
    cfg.b = "no_such_reward";
    EXPECT_THROW(cmd_distance(cfg), ValidationError);
    cfg.b = "zero";
    EXPECT_THROW(cmd_distance(cfg), DegenerateError);
    cfg.b = "dense_goal";
    cfg.env = "no_such_env";
    EXPECT_THROW(cmd_distance(cfg), ValidationError);
    cfg.env = "gridworld:3x4";
    EXPECT_THROW(cmd_distance(cfg), ValidationError);
    cfg.env = "gridworld";
    cfg.method = "bogus";
    EXPECT_THROW(cmd_distance(cfg), ValidationError);
}

TEST(CliDistance, CsvOutput) {
    auto cfg = base();
    cfg.a = "dirt_path";
    cfg.b = "dirt_path";
    cfg.format = "csv";
    EXPECT_EQ(cmd_distance(cfg).text, "method,a,b,value,ci_lower,ci_upper\nepic,dirt_path,dirt_path,0.0,0.0,0.0\n");
}

TEST(CliMatrix, GridworldFamily) {
    auto cfg = base();
    cfg.rewards = {"sparse_goal", "dense_goal", "dirt_path", "cliff_walk"};
    const auto out = cmd_matrix(cfg);
    EXPECT_EQ(out.exit_code, 0);
    const auto m = run_json(out)["matrix"];
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_LT(m[i][i].get<double>(), 1e-12);
        for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(m[i][k].get<double>(), m[k][i].get<double>());
    }
    EXPECT_LT(m[0][1].get<double>(), 1e-10);
    EXPECT_GT(m[2][3].get<double>(), 0.1);
}

TEST(CliMatrix, NpecAsymmetryCounterexample) {
    RunConfig cfg;
    cfg.method = "npec";
    cfg.env = data("npec_counterexample.json");
    cfg.discount = 1.0;
    cfg.p = 1.0;
    cfg.rewards = {"a", "b"};
    const auto m = run_json(cmd_matrix(cfg))["matrix"];
    EXPECT_NEAR(m[0][1].get<double>(), 0.5, 1e-12);
    EXPECT_NEAR(m[1][0].get<double>(), 1.0, 1e-12);
}

TEST(CliMatrix, FailedCellsAreNull) {
    auto cfg = base();
    cfg.rewards = {"sparse_goal", "zero"};
    const auto out = cmd_matrix(cfg);
    EXPECT_NE(out.exit_code, 0);
    const auto j = run_json(out);
    EXPECT_TRUE(j["matrix"][0][1].is_null());
    EXPECT_TRUE(j["cells"][0][1]["error"].is_string());
    EXPECT_FALSE(out.warnings.empty());
    cfg.format = "csv";
    EXPECT_NE(cmd_matrix(cfg).text.find("null"), std::string::npos);
}

TEST(CliMatrix, CsvHeaderAndSingleRewardRejected) {
    auto cfg = base();
    cfg.rewards = {"sparse_goal", "dirt_path"};
    cfg.format = "csv";
    const auto text = cmd_matrix(cfg).text;
    EXPECT_EQ(text.substr(0, text.find('\n')), "reward,sparse_goal,dirt_path");
    cfg.rewards = {"sparse_goal"};
    EXPECT_THROW(cmd_matrix(cfg), ValidationError);
}

TEST(CliMatrix, ByteStable) {
    auto cfg = base("erc");
    cfg.rewards = {"sparse_goal", "dirt_path", "cliff_walk"};
    cfg.episodes = 128;
    cfg.horizon = 30;
    EXPECT_EQ(cmd_matrix(cfg).text, cmd_matrix(cfg).text);
    auto sampled = base();
    sampled.sampled = true;
    sampled.rewards = {"dirt_path", "cliff_walk"};
    sampled.nv = sampled.nm = 256;
    sampled.seeds = 3;
    EXPECT_EQ(cmd_matrix(sampled).text, cmd_matrix(sampled).text);
}

TEST(CliRegretSuite, EmptyAndSmallRuns) {
    RunConfig cfg;
    cfg.instances = 0;
    auto out = cmd_regret_suite(cfg);
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_EQ(run_json(out)["summary"]["all_hold"], true);
    cfg.instances = 12;
    out = cmd_regret_suite(cfg);
    EXPECT_EQ(out.exit_code, 0);
    const auto j = run_json(out);
    EXPECT_EQ(j["summary"]["held"], 12);
    for (const auto& row : j["instances"])
        if (row["kind"] == "equivalent") {
            EXPECT_NEAR(row["lhs"].get<double>(), 0.0, 1e-9);
            EXPECT_LT(row["rhs"].get<double>(), 1e-6);
        }
}

TEST(CliConfig, AppliesKeysAndRejectsUnknown) {
    RunConfig cfg;
    apply_config_json(cfg, nlohmann::json::parse(
                               R"({"method": "ddsr", "rewards": "a,b", "nv": 100, "quick": true})"));
    EXPECT_EQ(cfg.method, "ddsr");
    EXPECT_EQ(cfg.rewards, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(*cfg.nv, 100);
    EXPECT_TRUE(cfg.quick);
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse(R"({"bogus": 1})")), ValidationError);
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse(R"({"nv": "x"})")), ValidationError);
}

TEST(CliEnvironment, ParsesGridworldOptions) {
    const auto env = load_environment("gridworld:4x4:slippery=0.2", std::nullopt);
    ASSERT_TRUE(env.tabular());
    EXPECT_EQ(env.mdp->n_states(), 16u);
    EXPECT_NEAR(env.mdp->transition(5, 1, 6), 0.8, 1e-15);
    EXPECT_THROW(load_environment("gridworld:slippery=x", std::nullopt), ValidationError);
    EXPECT_THROW(load_environment("gridworld", 1.5), ValidationError);
}
