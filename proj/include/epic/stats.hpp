#pragma once

// Percentile bootstrap confidence intervals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "epic/core.hpp"
#include "epic/reward_function.hpp"

namespace epic {

struct BootstrapConfig {
    std::size_t n_resamples = 10000;
    double level = 0.95;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_resamples < 1) throw ValidationError("bootstrap: n_resamples must be >= 1");
        if (!(level > 0.0 && level < 1.0)) throw ValidationError("bootstrap: level must be in (0, 1)");
    }
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Linear-interpolation quantile of sorted data, q in [0, 1].
inline double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw InsufficientDataError("quantile of empty data");
    const double pos = q * double(sorted.size() - 1);
    const auto lo = std::size_t(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - double(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Bootstrap over `n` items with an arbitrary statistic of the resampled
/// indices. A statistic may decline a resample by returning nullopt.
inline ConfidenceInterval
bootstrap_ci_indexed(std::size_t n,
                     const std::function<std::optional<double>(std::span<const std::size_t>)>& stat,
                     const BootstrapConfig& cfg) {
    cfg.validate();
    if (n < 2) throw InsufficientDataError("bootstrap needs at least 2 samples");
    Rng rng = make_rng(cfg.seed, 0xb007);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> idx(n);
    std::vector<double> reps;
    reps.reserve(cfg.n_resamples);
    for (std::size_t r = 0; r < cfg.n_resamples; ++r) {
        for (auto& i : idx) i = pick(rng);
        if (auto v = stat(idx)) reps.push_back(*v);
    }
    if (reps.empty()) throw InsufficientDataError("bootstrap: every resample was degenerate");
    std::sort(reps.begin(), reps.end());
    const double alpha = 1.0 - cfg.level;
    return {sorted_quantile(reps, alpha / 2.0), sorted_quantile(reps, 1.0 - alpha / 2.0)};
}

inline double mean_of(std::span<const double> xs) {
    detail::KahanSum acc;
    for (double x : xs) acc.add(x);
    return acc.value() / double(xs.size());
}

/// Percentile interval for the mean of `samples`.
inline ConfidenceInterval bootstrap_ci(std::span<const double> samples,
                                       const BootstrapConfig& cfg = {}) {
    if (samples.size() < 2) throw InsufficientDataError("bootstrap needs at least 2 samples");
    // All-equal samples: every resample mean is that value.
    if (std::all_of(samples.begin(), samples.end(), [&](double v) { return v == samples[0]; }))
        return {samples[0], samples[0]};
    return bootstrap_ci_indexed(
        samples.size(),
        [&](std::span<const std::size_t> idx) -> std::optional<double> {
            detail::KahanSum acc;
            for (auto i : idx) acc.add(samples[i]);
            return acc.value() / double(idx.size());
        },
        cfg);
}

} // namespace epic
