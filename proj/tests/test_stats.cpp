#include <gtest/gtest.h>

#include <random>

#include "epic/stats.hpp"

using namespace epic;

TEST(SortedQuantile, LinearInterpolation) {
    const std::vector<double> v{1, 2, 3, 4, 5};
    EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(sorted_quantile(v, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.1), 1.4);
    EXPECT_THROW(sorted_quantile(std::vector<double>{}, 0.5), InsufficientDataError);
}

TEST(BootstrapCi, ConstantSamplesGiveDegenerateInterval) {
    const std::vector<double> v(10, 0.25);
    const auto ci = bootstrap_ci(v);
    EXPECT_EQ(ci.lower, 0.25);
    EXPECT_EQ(ci.upper, 0.25);
}

TEST(BootstrapCi, BracketsTheMeanAndIsDeterministic) {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> n(3.0, 1.0);
    std::vector<double> v(40);
    for (auto& x : v) x = n(rng);
    BootstrapConfig cfg;
    cfg.n_resamples = 2000;
    cfg.seed = 9;
    const auto a = bootstrap_ci(v, cfg), b = bootstrap_ci(v, cfg);
    EXPECT_EQ(a.lower, b.lower);
    EXPECT_EQ(a.upper, b.upper);
    const double m = mean_of(v);
    EXPECT_LT(a.lower, m);
    EXPECT_GT(a.upper, m);
    // Roughly +-1.96 sigma / sqrt(n).
    EXPECT_NEAR(a.upper - a.lower, 2 * 1.96 / std::sqrt(40.0), 0.2);
}

TEST(BootstrapCi, CoverageNearNominal) {
    // 1000 experiments of 30 Gaussian draws; the 95% interval should contain the
    // true mean in roughly 95% of them. The percentile method undercovers a bit
    // at n = 30, so accept [90%, 99%].
    std::mt19937_64 rng(52);
    std::normal_distribution<double> n(0.0, 1.0);
    BootstrapConfig cfg;
    cfg.n_resamples = 1000;
    int hits = 0;
    const int reps = 1000;
    std::vector<double> v(30);
    for (int r = 0; r < reps; ++r) {
        for (auto& x : v) x = n(rng);
        cfg.seed = std::uint64_t(r);
        const auto ci = bootstrap_ci(v, cfg);
        if (ci.lower <= 0.0 && 0.0 <= ci.upper) ++hits;
    }
    const double coverage = double(hits) / reps;
    EXPECT_GE(coverage, 0.90);
    EXPECT_LE(coverage, 0.99);
}

TEST(BootstrapCi, ValidatesInput) {
    EXPECT_THROW(bootstrap_ci(std::vector<double>{1.0}), InsufficientDataError);
    BootstrapConfig bad;
    bad.level = 1.0;
    EXPECT_THROW(bootstrap_ci(std::vector<double>{1.0, 2.0}, bad), ValidationError);
    bad.level = 0.95;
    bad.n_resamples = 0;
    EXPECT_THROW(bootstrap_ci(std::vector<double>{1.0, 2.0}, bad), ValidationError);
}

TEST(BootstrapCiIndexed, SkipsDeclinedResamples) {
    int calls = 0;
    const auto ci = bootstrap_ci_indexed(
        5,
        [&](std::span<const std::size_t>) -> std::optional<double> {
            return ++calls % 2 ? std::optional<double>(1.0) : std::nullopt;
        },
        {});
    EXPECT_EQ(ci.lower, 1.0);
    EXPECT_EQ(ci.upper, 1.0);
    EXPECT_THROW(bootstrap_ci_indexed(
                     5, [](std::span<const std::size_t>) -> std::optional<double> { return std::nullopt; },
                     {}),
                 InsufficientDataError);
}
