#pragma once

// EPIC, DDSR, direct L^p and episode-return-correlation distances.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epic/canonical.hpp"
#include "epic/core.hpp"
#include "epic/reward_function.hpp"
#include "epic/sampling.hpp"
#include "epic/stats.hpp"

namespace epic {

struct DistanceEstimate {
    std::string method;
    double value = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    std::size_t n_seeds = 0;
    std::vector<double> seed_values;
    std::vector<std::string> failures;
    Eigen::Index n_v = 0;
    Eigen::Index n_m = 0;
    std::size_t episodes = 0;
};

namespace detail {

struct Moments {
    double mean;
    double stddev;
};

inline Moments weighted_moments(std::span<const double> x, std::span<const double> w) {
    KahanSum m;
    for (std::size_t i = 0; i < x.size(); ++i) m.add(w[i] * x[i]);
    const double mean = m.value();
    KahanSum v;
    for (std::size_t i = 0; i < x.size(); ++i) v.add(w[i] * (x[i] - mean) * (x[i] - mean));
    return {mean, std::sqrt(std::max(0.0, v.value()))};
}

inline std::vector<double> normalized_weights(std::size_t n, std::span<const double> weights) {
    if (weights.empty()) return std::vector<double>(n, 1.0 / double(n));
    if (weights.size() != n) throw DimensionError("pearson_distance: weight length mismatch");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ValidationError("pearson_distance: weights must be nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("pearson_distance: weights sum to zero");
    std::vector<double> out(weights.begin(), weights.end());
    for (double& w : out) w /= total;
    return out;
}

inline double max_abs(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

} // namespace detail

/// sqrt(1 - rho) / sqrt(2), computed as half the weighted L2 distance between the
/// standardized inputs. A standard deviation at or below
/// `atol + 1e-13 * max|input|` counts as constant.
inline double pearson_distance(std::span<const double> x, std::span<const double> y,
                               std::span<const double> weights = {}, double atol = 0.0) {
    if (x.size() != y.size()) throw DimensionError("pearson_distance: length mismatch");
    if (x.size() < 2) throw InsufficientDataError("pearson_distance: need at least 2 points");
    const auto w = detail::normalized_weights(x.size(), weights);
    const auto mx = detail::weighted_moments(x, w);
    const auto my = detail::weighted_moments(y, w);
    if (mx.stddev <= atol + 1e-13 * detail::max_abs(x))
        throw DegenerateError("x", "pearson_distance: first argument has zero variance");
    if (my.stddev <= atol + 1e-13 * detail::max_abs(y))
        throw DegenerateError("y", "pearson_distance: second argument has zero variance");
    detail::KahanSum acc;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = (x[i] - mx.mean) / mx.stddev - (y[i] - my.mean) / my.stddev;
        acc.add(w[i] * d * d);
    }
    return std::min(1.0, 0.5 * std::sqrt(std::max(0.0, acc.value())));
}

namespace detail {

/// Canonical values and coverage weights restricted to the support of D.
struct SupportedCanonical {
    std::vector<double> a, b, weights;
};

inline SupportedCanonical canonical_on_support(const RewardTable& a, const RewardTable& b,
                                               const CoverageDistribution& dist, double discount) {
    require_same_shape(a, b);
    if (!(a.shape() == dist.shape())) throw DimensionError("coverage shape mismatch");
    const auto ca = canonicalize_exact(a, dist, discount);
    const auto cb = canonicalize_exact(b, dist, discount);
    SupportedCanonical out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double w = dist.joint()[i];
        if (w <= 0.0) continue;
        out.a.push_back(ca.values.values()[i]);
        out.b.push_back(cb.values.values()[i]);
        out.weights.push_back(w);
    }
    return out;
}

inline double degenerate_atol(const RewardTable& r) { return 1e-10 * max_abs(r.values()); }

inline void rename_degenerate(const DegenerateError& e, const char* which_x, const char* which_y) {
    throw DegenerateError(e.argument == "x" ? which_x : which_y,
                          std::string("canonical reward '") +
                              (e.argument == "x" ? which_x : which_y) +
                              "' is constant under the coverage distribution");
}

} // namespace detail

inline double epic_exact(const RewardTable& a, const RewardTable& b,
                         const CoverageDistribution& dist, double discount) {
    const auto sc = detail::canonical_on_support(a, b, dist, discount);
    const double atol = std::max(detail::degenerate_atol(a), detail::degenerate_atol(b));
    try {
        return pearson_distance(sc.a, sc.b, sc.weights, atol);
    } catch (const DegenerateError& e) {
        detail::rename_degenerate(e, "a", "b");
    }
    return 0.0;
}

/// (E_D |x - y|^p)^(1/p) over weighted points.
inline double weighted_lp(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w, double p) {
    if (!(p >= 1.0)) throw ValidationError("L^p distance needs p >= 1");
    detail::KahanSum acc;
    for (std::size_t i = 0; i < x.size(); ++i) acc.add(w[i] * std::pow(std::abs(x[i] - y[i]), p));
    return std::pow(std::max(0.0, acc.value()), 1.0 / p);
}

inline double direct_distance_lp(const RewardTable& a, const RewardTable& b,
                                  const CoverageDistribution& dist, double p) {
    require_same_shape(a, b);
    if (!(a.shape() == dist.shape())) throw DimensionError("coverage shape mismatch");
    return weighted_lp(a.values(), b.values(), dist.joint(), p);
}

/// Half the L^p distance between the standardized canonical rewards, where
/// standardizing centers under D and divides by the L^p norm under D.
inline double ddsr_distance(const RewardTable& a, const RewardTable& b,
                            const CoverageDistribution& dist, double discount, double p) {
    if (!(p >= 1.0)) throw ValidationError("ddsr_distance: p must be >= 1");
    auto sc = detail::canonical_on_support(a, b, dist, discount);
    const double atol = std::max(detail::degenerate_atol(a), detail::degenerate_atol(b));
    auto standardize = [&](std::vector<double>& v, const char* name) {
        const auto m = detail::weighted_moments(v, sc.weights);
        for (double& x : v) x -= m.mean;
        const std::vector<double> zero(v.size(), 0.0);
        const double norm = weighted_lp(v, zero, sc.weights, p);
        if (norm <= atol + 1e-13 * detail::max_abs(v))
            throw DegenerateError(name, std::string("ddsr_distance: canonical reward '") + name +
                                            "' has zero norm");
        for (double& x : v) x /= norm;
    };
    standardize(sc.a, "a");
    standardize(sc.b, "b");
    return std::min(1.0, 0.5 * weighted_lp(sc.a, sc.b, sc.weights, p));
}

namespace detail {

inline void finish_seed_estimate(DistanceEstimate& est, const BootstrapConfig& boot) {
    if (est.seed_values.size() < 2)
        throw InsufficientDataError(est.method + ": fewer than 2 seeds succeeded" +
                                    (est.failures.empty() ? "" : " (" + est.failures.front() + ")"));
    est.n_seeds = est.seed_values.size();
    est.value = mean_of(est.seed_values);
    const auto ci = bootstrap_ci(est.seed_values, boot);
    est.ci_lower = std::min(ci.lower, est.value);
    est.ci_upper = std::max(ci.upper, est.value);
}

} // namespace detail

struct SampledEpicConfig {
    Eigen::Index n_v = 32768;
    Eigen::Index n_m = 32768;
    std::size_t n_seeds = 30;
    std::uint64_t seed = 0;
    BootstrapConfig bootstrap{};
};

/// One sampled EPIC value for a single seed; B_V and B_M are drawn
/// independently from `sampler`.
inline double epic_sampled_once(const RewardFunction& a, const RewardFunction& b,
                                const CoverageSampler& sampler, double discount, Eigen::Index n_v,
                                Eigen::Index n_m, Rng& rng) {
    const auto batch_v = sampler.transitions(n_v, rng);
    const auto batch_m = sampler.state_actions(n_m, rng);
    const Eigen::VectorXd ca = canonicalize_sampled(a, batch_v, batch_m, discount);
    const Eigen::VectorXd cb = canonicalize_sampled(b, batch_v, batch_m, discount);
    const Eigen::VectorXd ra = a(batch_v), rb = b(batch_v);
    const double atol = 1e-10 * std::max(ra.cwiseAbs().maxCoeff(), rb.cwiseAbs().maxCoeff());
    return pearson_distance({ca.data(), std::size_t(ca.size())},
                            {cb.data(), std::size_t(cb.size())}, {}, atol);
}

inline DistanceEstimate epic_sampled(const RewardFunction& a, const RewardFunction& b,
                                     const CoverageSampler& sampler, double discount,
                                     const SampledEpicConfig& cfg = {}) {
    if (cfg.n_v < 2 || cfg.n_m < 2) throw ValidationError("epic_sampled: N_V and N_M must be >= 2");
    DistanceEstimate est;
    est.method = "epic";
    est.n_v = cfg.n_v;
    est.n_m = cfg.n_m;
    for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
        Rng rng = make_rng(cfg.seed, s);
        try {
            est.seed_values.push_back(
                epic_sampled_once(a, b, sampler, discount, cfg.n_v, cfg.n_m, rng));
        } catch (const DegenerateError& e) {
            est.failures.push_back("seed " + std::to_string(s) + ": " + e.what());
        }
    }
    detail::finish_seed_estimate(est, cfg.bootstrap);
    return est;
}

/// Pearson distance between paired episode returns, with an episode-level
/// bootstrap CI. Degenerate errors carry `name_a` or `name_b`.
inline DistanceEstimate erc_from_returns(const std::vector<double>& ga,
                                         const std::vector<double>& gb,
                                         const std::string& name_a, const std::string& name_b,
                                         const BootstrapConfig& boot = {}) {
    if (ga.size() != gb.size()) throw DimensionError("erc: return lists differ in length");
    if (ga.size() < 2) throw InsufficientDataError("erc_distance: need at least 2 episodes");
    DistanceEstimate est;
    est.method = "erc";
    est.episodes = ga.size();
    try {
        est.value = pearson_distance(ga, gb);
    } catch (const DegenerateError& e) {
        const auto& who = e.argument == "x" ? name_a : name_b;
        throw DegenerateError(who, "erc_distance: returns of reward '" + who + "' are constant");
    }
    std::vector<double> xa(ga.size()), xb(ga.size());
    const auto ci = bootstrap_ci_indexed(
        ga.size(),
        [&](std::span<const std::size_t> idx) -> std::optional<double> {
            for (std::size_t k = 0; k < idx.size(); ++k) {
                xa[k] = ga[idx[k]];
                xb[k] = gb[idx[k]];
            }
            try {
                return pearson_distance(xa, xb);
            } catch (const DegenerateError&) {
                return std::nullopt;
            }
        },
        boot);
    est.ci_lower = std::min(ci.lower, est.value);
    est.ci_upper = std::max(ci.upper, est.value);
    est.n_seeds = 1;
    return est;
}

inline std::vector<double> episode_returns(const std::vector<Trajectory>& episodes,
                                           const RewardFunction& reward, double discount) {
    std::vector<double> out;
    out.reserve(episodes.size());
    for (const auto& ep : episodes) out.push_back(discounted_return(ep, reward, discount));
    return out;
}

/// Pearson distance between episode returns, with an episode-level bootstrap CI.
inline DistanceEstimate erc_distance(const RewardFunction& a, const RewardFunction& b,
                                     const std::vector<Trajectory>& episodes, double discount,
                                     const BootstrapConfig& boot = {}) {
    if (episodes.size() < 2) throw InsufficientDataError("erc_distance: need at least 2 episodes");
    return erc_from_returns(episode_returns(episodes, a, discount),
                            episode_returns(episodes, b, discount),
                            a.name().empty() ? "a" : a.name(), b.name().empty() ? "b" : b.name(),
                            boot);
}

} // namespace epic
