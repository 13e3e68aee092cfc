#include <gtest/gtest.h>

#include <random>

#include "epic/distances.hpp"
#include "epic/environments.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace epic;

TEST(PearsonDistance, MatchesCorrelationFormula) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(20), y(20), w(20);
        for (std::size_t i = 0; i < 20; ++i) {
            x[i] = n(rng);
            y[i] = 0.3 * x[i] + n(rng);
            w[i] = std::abs(n(rng)) + 0.01;
        }
        EXPECT_NEAR(pearson_distance(x, y, w), oracle::pearson_distance(x, y, w), 1e-12);
        EXPECT_NEAR(pearson_distance(x, y), oracle::pearson_distance(x, y), 1e-12);
    }
}

TEST(PearsonDistance, KnownValues) {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> neg{-1, -2, -3, -4};
    const std::vector<double> shifted{11, 12, 13, 14};
    EXPECT_EQ(pearson_distance(x, x), 0.0);
    EXPECT_NEAR(pearson_distance(x, shifted), 0.0, 1e-15);
    EXPECT_NEAR(pearson_distance(x, neg), 1.0, 1e-15);
    // Orthogonal centered vectors: rho = 0, distance 1/sqrt(2).
    EXPECT_NEAR(pearson_distance(std::vector<double>{1, -1, 1, -1}, std::vector<double>{1, 1, -1, -1}),
                std::sqrt(0.5), 1e-15);
}

TEST(PearsonDistance, ExactSymmetry) {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(9), y(9);
        for (auto& v : x) v = n(rng);
        for (auto& v : y) v = n(rng);
        EXPECT_EQ(pearson_distance(x, y), pearson_distance(y, x));
    }
}

TEST(PearsonDistance, DegenerateInputsNameTheArgument) {
    const std::vector<double> c{2, 2, 2}, x{1, 2, 3};
    try {
        pearson_distance(x, c);
        FAIL();
    } catch (const DegenerateError& e) {
        EXPECT_EQ(e.argument, "y");
    }
    try {
        pearson_distance(c, x);
        FAIL();
    } catch (const DegenerateError& e) {
        EXPECT_EQ(e.argument, "x");
    }
    EXPECT_THROW(pearson_distance(std::vector<double>{1}, std::vector<double>{1}),
                 InsufficientDataError);
    EXPECT_THROW(pearson_distance(x, std::vector<double>{1, 2}), DimensionError);
}

TEST(EpicExact, MatchesOracleUnderProductCoverage) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 30; ++trial) {
        const auto shape = oracle::random_shape(rng, 6, 3);
        const auto a = oracle::random_reward(shape, rng), b = oracle::random_reward(shape, rng);
        const auto ds = oracle::random_simplex(shape.n_states, rng);
        const auto da = oracle::random_simplex(shape.n_actions, rng);
        const auto dist = CoverageDistribution::product(ds, da);
        EXPECT_NEAR(epic_exact(a, b, dist, 0.9), oracle::epic_product(a, b, ds, da, 0.9), 1e-10);
    }
}

TEST(EpicExact, ZeroOnEquivalentRewards) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 50; ++trial) {
        const auto shape = oracle::random_shape(rng);
        const auto r = oracle::random_reward(shape, rng);
        std::uniform_real_distribution<double> lam(1e-3, 10.0);
        const EquivalenceTransform tf{lam(rng), oracle::random_potential(shape.n_states, rng, 10.0)};
        const auto dist = CoverageDistribution::uniform(shape);
        EXPECT_LT(epic_exact(r, apply_equivalence(r, tf, 0.9), dist, 0.9), 1e-9);
    }
}

TEST(EpicExact, NegatedRewardIsAtDistanceOne) {
    std::mt19937_64 rng(35);
    const auto r = oracle::random_reward({4, 2}, rng);
    EXPECT_NEAR(epic_exact(r, -1.0 * r, CoverageDistribution::uniform({4, 2}), 0.9), 1.0, 1e-12);
}

TEST(EpicExact, ZeroRewardIsDegenerate) {
    std::mt19937_64 rng(36);
    const auto r = oracle::random_reward({3, 2}, rng);
    const RewardTable z({3, 2});
    const auto dist = CoverageDistribution::uniform({3, 2});
    try {
        epic_exact(r, z, dist, 0.9);
        FAIL();
    } catch (const DegenerateError& e) {
        EXPECT_EQ(e.argument, "b");
    }
    // A pure shaping term canonicalizes to a constant too.
    const auto shaping = shaping_only(oracle::random_potential(3, rng), 0.9, {3, 2});
    try {
        epic_exact(shaping, r, dist, 0.9);
        FAIL();
    } catch (const DegenerateError& e) {
        EXPECT_EQ(e.argument, "a");
    }
}

TEST(DdsrDistance, EqualsEpicAtPTwo) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 30; ++trial) {
        const auto shape = oracle::random_shape(rng);
        const auto a = oracle::random_reward(shape, rng), b = oracle::random_reward(shape, rng);
        // Non-product joint: random weights over all triples.
        const auto joint = oracle::random_simplex(shape.size(), rng);
        const auto dist = CoverageDistribution::from_joint(shape, joint);
        EXPECT_NEAR(ddsr_distance(a, b, dist, 0.9, 2.0), epic_exact(a, b, dist, 0.9), 1e-12);
    }
}

TEST(DdsrDistance, InvariantToShapingForAnyP) {
    std::mt19937_64 rng(38);
    const TransitionShape shape{5, 2};
    const auto a = oracle::random_reward(shape, rng), b = oracle::random_reward(shape, rng);
    const auto dist = CoverageDistribution::uniform(shape);
    const auto shaped = apply_equivalence(a, {4.0, oracle::random_potential(5, rng)}, 0.9);
    for (double p : {1.0, 1.5, 3.0})
        EXPECT_NEAR(ddsr_distance(a, b, dist, 0.9, p), ddsr_distance(shaped, b, dist, 0.9, p), 1e-10);
    EXPECT_THROW(ddsr_distance(a, b, dist, 0.9, 0.5), ValidationError);
}

TEST(DirectDistance, MatchesDefinition) {
    const TransitionShape shape{2, 1};
    const RewardTable a(shape, {0, 0, 0, 2}), b(shape, {1, 0, 0, 1});
    const auto dist = CoverageDistribution::from_joint(shape, {0.5, 0, 0, 0.5});
    EXPECT_NEAR(direct_distance_lp(a, b, dist, 1.0), 1.0, 1e-15);
    EXPECT_NEAR(direct_distance_lp(a, b, dist, 2.0), 1.0, 1e-15);
    // Not shaping invariant.
    const auto shaped = a + shaping_only(std::vector<double>{1.0, 0.0}, 0.9, shape);
    EXPECT_GT(std::abs(direct_distance_lp(shaped, b, CoverageDistribution::uniform(shape), 2.0) -
                       direct_distance_lp(a, b, CoverageDistribution::uniform(shape), 2.0)),
              0.1);
}

TEST(EpicSampled, ConvergesToExactOnTabularBlackBoxes) {
    std::mt19937_64 rng(39);
    const TransitionShape shape{4, 2};
    const auto a = oracle::random_reward(shape, rng), b = oracle::random_reward(shape, rng);
    const auto dist = CoverageDistribution::uniform(shape);
    SampledEpicConfig cfg;
    cfg.n_v = cfg.n_m = 8192;
    cfg.n_seeds = 5;
    cfg.bootstrap.n_resamples = 1000;
    const auto est = epic_sampled(tabular_reward_function(a), tabular_reward_function(b),
                                  tabular_sampler(dist), 0.9, cfg);
    EXPECT_NEAR(est.value, epic_exact(a, b, dist, 0.9), 0.02);
    EXPECT_LE(est.ci_lower, est.value);
    EXPECT_GE(est.ci_upper, est.value);
    EXPECT_EQ(est.n_seeds, 5u);
    EXPECT_EQ(est.seed_values.size(), 5u);
}

TEST(EpicSampled, DeterministicGivenSeed) {
    std::mt19937_64 rng(40);
    const TransitionShape shape{3, 2};
    const auto fa = tabular_reward_function(oracle::random_reward(shape, rng));
    const auto fb = tabular_reward_function(oracle::random_reward(shape, rng));
    SampledEpicConfig cfg;
    cfg.n_v = cfg.n_m = 256;
    cfg.n_seeds = 3;
    cfg.bootstrap.n_resamples = 200;
    const auto sampler = tabular_sampler(CoverageDistribution::uniform(shape));
    const auto e1 = epic_sampled(fa, fb, sampler, 0.9, cfg);
    const auto e2 = epic_sampled(fa, fb, sampler, 0.9, cfg);
    EXPECT_EQ(e1.seed_values, e2.seed_values);
    EXPECT_EQ(e1.ci_lower, e2.ci_lower);
}

TEST(EpicSampled, AllSeedsDegenerateFails) {
    const TransitionShape shape{3, 2};
    std::mt19937_64 rng(41);
    const auto fa = tabular_reward_function(oracle::random_reward(shape, rng));
    const auto fz = tabular_reward_function(RewardTable(shape), "zero");
    SampledEpicConfig cfg;
    cfg.n_v = cfg.n_m = 64;
    cfg.n_seeds = 3;
    EXPECT_THROW(epic_sampled(fa, fz, tabular_sampler(CoverageDistribution::uniform(shape)), 0.9, cfg),
                 InsufficientDataError);
    cfg.n_v = 1;
    EXPECT_THROW(epic_sampled(fa, fa, tabular_sampler(CoverageDistribution::uniform(shape)), 0.9, cfg),
                 ValidationError);
}

namespace {

/// Episode returns written out by hand: base reward plus g * phi(T) - phi(s0).
std::vector<double> toy_returns(const RewardTable& base, double c_potential) {
    std::vector<double> out;
    for (auto s : {fixtures::kX, fixtures::kY})
        for (auto t : {fixtures::kT1, fixtures::kT2})
            out.push_back(base(s, 0, t) - (s == fixtures::kX ? c_potential : 0.0));
    return out;
}

} // namespace

TEST(ErcDistance, MatchesClosedFormOnToyMdp) {
    const auto ra = fixtures::erc_toy_reward(1.0, 0.0, 0.5, 2.0);
    const auto rb = fixtures::erc_toy_reward(0.0, 1.5, 1.0, -1.0);
    const auto eps = fixtures::erc_toy_episodes();
    const double g = 0.9;
    for (double c : {0.0, 1.0, 100.0}) {
        const auto sa = ra + shaping_only(fixtures::erc_toy_potential(c), g, ra.shape());
        const auto sb = rb + shaping_only(fixtures::erc_toy_potential(-c), g, rb.shape());
        BootstrapConfig boot;
        boot.n_resamples = 500;
        const auto est = erc_distance(tabular_reward_function(sa), tabular_reward_function(sb), eps, g, boot);
        EXPECT_NEAR(est.value, oracle::pearson_distance(toy_returns(ra, c), toy_returns(rb, -c)), 1e-12);
        EXPECT_LE(est.ci_lower, est.value);
        EXPECT_GE(est.ci_upper, est.value);
    }
}

TEST(ErcDistance, ShapingInvariantWithFixedStartAndTerminalZeroPotential) {
    // Episodes all start in X and end in terminal states with zero potential,
    // so shaping adds the same constant -c to every return.
    const auto ra = fixtures::erc_toy_reward(1.0, 0.0, 0.5, 2.0);
    const auto sa = ra + shaping_only(fixtures::erc_toy_potential(50.0), 0.9, ra.shape());
    auto eps = fixtures::erc_toy_episodes();
    eps.resize(2); // (X,T1), (X,T2)
    const auto fa = tabular_reward_function(ra), fs = tabular_reward_function(sa);
    BootstrapConfig boot;
    boot.n_resamples = 100;
    EXPECT_NEAR(erc_distance(fa, fs, eps, 0.9, boot).value, 0.0, 1e-12);
}

TEST(ErcDistance, ConstantReturnsAreDegenerate) {
    const auto fz = tabular_reward_function(RewardTable(fixtures::erc_toy_shape()), "zero");
    const auto fa = tabular_reward_function(fixtures::erc_toy_reward(1, 0, 0, 1), "a");
    try {
        erc_distance(fa, fz, fixtures::erc_toy_episodes(), 0.9);
        FAIL();
    } catch (const DegenerateError& e) {
        EXPECT_EQ(e.argument, "zero");
    }
    EXPECT_THROW(erc_distance(fa, fa, {}, 0.9), InsufficientDataError);
}
