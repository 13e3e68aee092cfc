#include <gtest/gtest.h>

#include <random>

#include "epic/canonical.hpp"
#include "epic/sampling.hpp"
#include "oracles.hpp"

using namespace epic;

TEST(CanonicalizeExact, MatchesLoopOracle) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const auto shape = oracle::random_shape(rng, 6, 4);
        const auto r = oracle::random_reward(shape, rng);
        const auto ds = oracle::random_simplex(shape.n_states, rng);
        const auto da = oracle::random_simplex(shape.n_actions, rng);
        const double g = trial % 3 == 0 ? 1.0 : 0.9;
        const auto got = canonicalize_exact(r, ds, da, g);
        const auto want = oracle::canonicalize(r, ds, da, g);
        for (std::size_t i = 0; i < r.size(); ++i)
            EXPECT_NEAR(got.values.values()[i], want.values()[i], 1e-12);
    }
}

TEST(CanonicalizeExact, RemovesPotentialShaping) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const auto shape = oracle::random_shape(rng);
        const auto r = oracle::random_reward(shape, rng);
        const auto phi = oracle::random_potential(shape.n_states, rng, 10.0);
        const auto ds = oracle::random_simplex(shape.n_states, rng);
        const auto da = oracle::random_simplex(shape.n_actions, rng);
        const double g = 0.99;
        const auto shaped = r + shaping_only(phi, g, shape);
        const auto c0 = canonicalize_exact(r, ds, da, g), c1 = canonicalize_exact(shaped, ds, da, g);
        for (std::size_t i = 0; i < r.size(); ++i)
            EXPECT_NEAR(c0.values.values()[i], c1.values.values()[i], 1e-10);
    }
}

TEST(CanonicalizeExact, IsLinearInScale) {
    std::mt19937_64 rng(23);
    const TransitionShape shape{5, 3};
    const auto r = oracle::random_reward(shape, rng);
    const auto ds = oracle::random_simplex(5, rng), da = oracle::random_simplex(3, rng);
    const auto c1 = canonicalize_exact(r, ds, da, 0.9);
    const auto c3 = canonicalize_exact(3.0 * r, ds, da, 0.9);
    for (std::size_t i = 0; i < r.size(); ++i)
        EXPECT_NEAR(c3.values.values()[i], 3.0 * c1.values.values()[i], 1e-12);
}

TEST(CanonicalizeExact, MeanIsZeroUnderProductDistribution) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 30; ++trial) {
        const auto shape = oracle::random_shape(rng);
        const auto r = oracle::random_reward(shape, rng, 5.0);
        const auto ds = oracle::random_simplex(shape.n_states, rng);
        const auto da = oracle::random_simplex(shape.n_actions, rng);
        const auto c = canonicalize_exact(r, ds, da, 0.9);
        long double mean = 0.0L;
        for (std::size_t s = 0; s < shape.n_states; ++s)
            for (std::size_t a = 0; a < shape.n_actions; ++a)
                for (std::size_t t = 0; t < shape.n_states; ++t)
                    mean += (long double)ds[s] * da[a] * ds[t] * c.values(s, a, t);
        EXPECT_LT(std::abs(double(mean)), 1e-12);
    }
}

TEST(CanonicalizeExact, RejectsMismatchedDistributions) {
    const RewardTable r({3, 2});
    EXPECT_THROW(canonicalize_exact(r, std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}, 0.9),
                 DimensionError);
    EXPECT_THROW(canonicalize_exact(r, std::vector<double>{0.5, 0.5, 0.5},
                                    std::vector<double>{0.5, 0.5}, 0.9),
                 ValidationError);
}

TEST(PerturbationNorm, MatchesBruteForce) {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 40; ++trial) {
        const auto shape = oracle::random_shape(rng, 6, 3);
        const auto r = oracle::random_reward(shape, rng);
        const auto ds = oracle::random_simplex(shape.n_states, rng);
        const auto da = oracle::random_simplex(shape.n_actions, rng);
        std::uniform_int_distribution<std::size_t> S(0, shape.n_states - 1), A(0, shape.n_actions - 1);
        const std::size_t x = S(rng), u = A(rng), xn = S(rng);
        const double lambda = std::normal_distribution<double>(0.0, 3.0)(rng);
        const double g = 0.95;
        EXPECT_NEAR(canonical_perturbation_norm(ds, da, x, u, xn, lambda, g),
                    oracle::perturbation_norm(r, ds, da, g, x, u, xn, lambda), 1e-10);
    }
}

TEST(PerturbationNorm, NeedsTwoStates) {
    EXPECT_THROW(canonical_perturbation_norm(std::vector<double>{1.0}, std::vector<double>{1.0}, 0,
                                             0, 0, 1.0, 0.9),
                 ValidationError);
}

namespace {

/// Every (a, s') pair once, which is an exact D_A x D_S batch when both are uniform.
StateActionBatch enumerate_mean_batch(std::size_t ns, std::size_t na) {
    StateActionBatch b{Eigen::MatrixXd::Zero(Eigen::Index(ns * na), Eigen::Index(na)),
                       Eigen::MatrixXd::Zero(Eigen::Index(ns * na), Eigen::Index(ns))};
    Eigen::Index row = 0;
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t t = 0; t < ns; ++t, ++row) {
            b.actions(row, Eigen::Index(a)) = 1.0;
            b.states(row, Eigen::Index(t)) = 1.0;
        }
    return b;
}

} // namespace

TEST(CanonicalizeSampled, ExactMeanBatchReproducesCanonicalUpToConstant) {
    std::mt19937_64 rng(26);
    const TransitionShape shape{4, 3};
    const auto table = oracle::random_reward(shape, rng);
    const auto fn = tabular_reward_function(table);
    const auto dist = CoverageDistribution::uniform(shape);
    Rng sample_rng = make_rng(1);
    const auto batch_v = tabular_sampler(dist).transitions(200, sample_rng);
    const auto got = canonicalize_sampled(fn, batch_v, enumerate_mean_batch(4, 3), 0.9);
    const auto exact = canonicalize_exact(table, dist, 0.9);
    double shift = 0.0;
    for (Eigen::Index i = 0; i < batch_v.size(); ++i) {
        const auto s = detail::decode_one_hot(batch_v.states.row(i));
        const auto a = detail::decode_one_hot(batch_v.actions.row(i));
        const auto t = detail::decode_one_hot(batch_v.next_states.row(i));
        const double d = got(i) - exact.values(s, a, t);
        if (i == 0) shift = d;
        EXPECT_NEAR(d, shift, 1e-12);
    }
}

TEST(CanonicalizeSampled, RemovesShapingExactly) {
    std::mt19937_64 rng(27);
    const TransitionShape shape{5, 2};
    const auto table = oracle::random_reward(shape, rng);
    const auto phi = oracle::random_potential(5, rng, 5.0);
    const auto shaped = table + shaping_only(phi, 0.9, shape);
    const auto dist = CoverageDistribution::uniform(shape);
    const auto sampler = tabular_sampler(dist);
    Rng srng = make_rng(2);
    const auto bv = sampler.transitions(500, srng);
    const auto bm = sampler.state_actions(300, srng);
    const Eigen::VectorXd c0 = canonicalize_sampled(tabular_reward_function(table), bv, bm, 0.9);
    const Eigen::VectorXd c1 = canonicalize_sampled(tabular_reward_function(shaped), bv, bm, 0.9);
    // Sampled shaping cancels up to the constant g * E_B_M[phi].
    const Eigen::VectorXd d = c1 - c0;
    EXPECT_LT((d.array() - d(0)).abs().maxCoeff(), 1e-10);
}

TEST(CanonicalizeSampled, RejectsEmptyMeanBatch) {
    const auto fn = tabular_reward_function(RewardTable({2, 1}));
    const TransitionBatch bv{Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 1),
                             Eigen::MatrixXd::Zero(1, 2)};
    const StateActionBatch bm{Eigen::MatrixXd(0, 1), Eigen::MatrixXd(0, 2)};
    EXPECT_THROW(canonicalize_sampled(fn, bv, bm, 0.9), InsufficientDataError);
}
