#pragma once

// Acceptance criteria 1 to 12. Shared by the `acceptance` test binary and the
// `epic acceptance` subcommand. Tolerances are fixed here and never adjusted
// at run time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "epic/epic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace epic::acceptance {

namespace detail {

namespace tol {
constexpr double kInvariance = 1e-9;
constexpr double kGridEquivalent = 1e-10;
constexpr double kGridSeparated = 0.1;
constexpr double kSelfDistance = 1e-12;
constexpr double kTriangle = 1e-9;
constexpr double kDdsr = 1e-10;
constexpr double kMeanZero = 1e-10;
constexpr double kPerturbation = 1e-10;
constexpr double kRegretSlack = 1e-9;
constexpr double kSampledVsExact = 0.01;
constexpr double kPointMassEpic = 1e-3;
constexpr double kNpecOverEpic = 100.0;
constexpr double kCounterexample = 1e-12;
constexpr double kErcOracle = 1e-8;
constexpr double kErcLimit = 1e-3;
constexpr double kMlpRelative = 1e-5;
} // namespace tol

struct Outcome {
    bool pass = false;
    std::string detail;
};

inline std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

/// Random product coverage D_S x D_A x D_S plus a discount in [0, 1).
struct RandomSetting {
    TransitionShape shape;
    CoverageDistribution dist;
    double discount;
};

inline RandomSetting random_setting(std::mt19937_64& rng, std::size_t max_s = 10, std::size_t max_a = 5) {
    const auto shape = oracle::random_shape(rng, max_s, max_a);
    auto ds = oracle::random_simplex(shape.n_states, rng);
    auto da = oracle::random_simplex(shape.n_actions, rng);
    const double g = std::uniform_real_distribution<double>(0.0, 0.999)(rng);
    return {shape, CoverageDistribution::product(ds, da), g};
}

/// Joint with full support drawn from a flat simplex, so D is not a product.
inline CoverageDistribution random_joint(TransitionShape shape, std::mt19937_64& rng) {
    return CoverageDistribution::from_joint(shape, oracle::random_simplex(shape.size(), rng));
}

// 1 -------------------------------------------------------------------------

inline Outcome equivalence_invariance() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        auto [shape, dist, g] = random_setting(rng);
        if (i % 2) dist = random_joint(shape, rng);
        const auto r = oracle::random_reward(shape, rng);
        // lambda uniform on (0, 10]
        const double lambda = 10.0 * (1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        const auto phi = oracle::random_potential(shape.n_states, rng, 5.0);
        const auto t = apply_equivalence(r, {lambda, phi}, g);
        worst = std::max(worst, epic_exact(r, t, dist, g));
    }
    return {worst < tol::kInvariance, fmt("max EPIC(R, transformed) = %.3g over 200 draws", worst)};
}

// 2 -------------------------------------------------------------------------

inline Outcome gridworld_figure() {
    const double g = 0.99;
    const auto mdp = gridworld_mdp(GridworldSpec{});
    const auto dist = CoverageDistribution::uniform_state_action(mdp);
    const double eq = epic_exact(gridworld_reward(3, GridReward::SparseGoal, g),
                                 gridworld_reward(3, GridReward::DenseGoal, g), dist, g);
    const double sep = epic_exact(gridworld_reward(3, GridReward::DirtPath, g),
                                  gridworld_reward(3, GridReward::CliffWalk, g), dist, g);
    return {eq <= tol::kGridEquivalent && sep > tol::kGridSeparated,
            fmt("EPIC(sparse, dense) = %.3g, EPIC(dirt_path, cliff_walk) = %.6f", eq, sep)};
}

// 3 -------------------------------------------------------------------------

inline Outcome pseudometric_axioms() {
    std::mt19937_64 rng(303);
    bool symmetric = true;
    double self = 0.0, triangle = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 200; ++i) {
        auto [shape, dist, g] = random_setting(rng);
        if (i % 2) dist = random_joint(shape, rng);
        const auto x = oracle::random_reward(shape, rng);
        // Every fourth triple has y equivalent to x, which puts the
        // triangle inequality at its tight end.
        const auto y = i % 4 == 0
                           ? apply_equivalence(x, {2.0, oracle::random_potential(shape.n_states, rng)}, g)
                           : oracle::random_reward(shape, rng);
        const auto z = oracle::random_reward(shape, rng);
        const double xy = epic_exact(x, y, dist, g), yx = epic_exact(y, x, dist, g);
        const double yz = epic_exact(y, z, dist, g), xz = epic_exact(x, z, dist, g);
        symmetric = symmetric && xy == yx && yz == epic_exact(z, y, dist, g);
        self = std::max({self, epic_exact(x, x, dist, g), epic_exact(z, z, dist, g)});
        triangle = std::max({triangle, xz - xy - yz, xy - xz - yz, yz - xy - xz});
    }

    bool p_symmetric = true;
    double p_self = 0.0, p_triangle = -std::numeric_limits<double>::infinity();
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto len = std::uniform_int_distribution<std::size_t>(3, 200)(rng);
        std::vector<double> x(len), y(len), z(len);
        for (std::size_t k = 0; k < len; ++k) x[k] = n(rng), y[k] = n(rng), z[k] = n(rng);
        const auto w = i % 2 ? oracle::random_simplex(len, rng) : std::vector<double>{};
        const double xy = pearson_distance(x, y, w), yx = pearson_distance(y, x, w);
        const double yz = pearson_distance(y, z, w), xz = pearson_distance(x, z, w);
        p_symmetric = p_symmetric && xy == yx;
        p_self = std::max(p_self, pearson_distance(x, x, w));
        p_triangle = std::max({p_triangle, xz - xy - yz, xy - xz - yz, yz - xy - xz});
    }
    const bool pass = symmetric && p_symmetric && self <= tol::kSelfDistance &&
                      p_self <= tol::kSelfDistance && triangle <= tol::kTriangle &&
                      p_triangle <= tol::kTriangle;
    return {pass, fmt("EPIC: symmetric=%s self<=%.3g triangle excess<=%.3g; Pearson: symmetric=%s "
                      "self<=%.3g triangle excess<=%.3g",
                      symmetric ? "yes" : "no", self, triangle, p_symmetric ? "yes" : "no", p_self,
                      p_triangle)};
}

// 4 -------------------------------------------------------------------------

inline Outcome ddsr_matches_epic() {
    std::mt19937_64 rng(404);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        auto [shape, dist, g] = random_setting(rng);
        if (i % 2) dist = random_joint(shape, rng);
        const auto a = oracle::random_reward(shape, rng), b = oracle::random_reward(shape, rng);
        worst = std::max(worst, std::abs(ddsr_distance(a, b, dist, g, 2.0) - epic_exact(a, b, dist, g)));
    }
    return {worst <= tol::kDdsr, fmt("max |DDSR(p=2) - EPIC| = %.3g over 50 pairs", worst)};
}

// 5 -------------------------------------------------------------------------

inline Outcome canonical_mean_zero() {
    std::mt19937_64 rng(505);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto [shape, dist, g] = random_setting(rng);
        // The scaled-up half stresses cancellation in the mean.
        const auto r = oracle::random_reward(shape, rng, i % 2 ? 100.0 : 1.0);
        const auto c = canonicalize_exact(r, dist, g);
        const auto& ds = dist.state_dist();
        const auto& da = dist.action_dist();
        long double mean = 0.0L;
        for (std::size_t s = 0; s < shape.n_states; ++s)
            for (std::size_t a = 0; a < shape.n_actions; ++a)
                for (std::size_t t = 0; t < shape.n_states; ++t)
                    mean += (long double)ds[s] * da[a] * ds[t] * c.values(s, a, t);
        worst = std::max(worst, double(std::abs(mean)));
    }
    return {worst <= tol::kMeanZero, fmt("max |E[C(R)]| = %.3g over 100 rewards", worst)};
}

// 6 -------------------------------------------------------------------------

inline Outcome perturbation_closed_form() {
    std::mt19937_64 rng(606);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto [shape, dist, g] = random_setting(rng, 6, 3);
        const auto r = oracle::random_reward(shape, rng);
        std::uniform_int_distribution<std::size_t> s(0, shape.n_states - 1), a(0, shape.n_actions - 1);
        const auto x = s(rng), u = a(rng), xn = s(rng);
        const double lambda = std::normal_distribution<double>(0.0, 3.0)(rng);
        const auto& ds = dist.state_dist();
        const auto& da = dist.action_dist();
        const double closed = canonical_perturbation_norm(ds, da, x, u, xn, lambda, g);
        const double brute = oracle::perturbation_norm(r, ds, da, g, x, u, xn, lambda);
        worst = std::max(worst, std::abs(closed - brute));
    }
    return {worst <= tol::kPerturbation, fmt("max |closed form - brute force| = %.3g over 20 instances", worst)};
}

// 7 -------------------------------------------------------------------------

inline Outcome regret_bound() {
    const double g = 0.9;
    std::size_t held = 0;
    double worst_ratio = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        Rng rng = make_rng(707, i);
        const auto ns = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
        const auto na = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        const auto [mdp, a] = random_mdp(ns, na, g, rng());
        RewardTable b(a.shape());
        std::normal_distribution<double> noise(0.0, 1.0);
        switch (i % 3) {
        case 0: b = random_mdp(ns, na, g, rng()).second; break;
        case 1:
            for (std::size_t k = 0; k < b.size(); ++k) b.values()[k] = a.values()[k] + 0.1 * noise(rng);
            break;
        default: {
            std::vector<double> phi(ns);
            for (auto& v : phi) v = noise(rng);
            b = apply_equivalence(a, {std::uniform_real_distribution<double>(0.1, 10.0)(rng), phi}, g);
        }
        }
        const auto rep = regret_bound_check(mdp, a, b);
        const bool ok = rep.lhs <= rep.rhs + tol::kRegretSlack;
        held += ok;
        if (rep.rhs > 0.0) worst_ratio = std::max(worst_ratio, rep.lhs / rep.rhs);
    }
    return {held == 100, fmt("bound held in %zu/100 MDPs, max regret/bound = %.3g", held, worst_ratio)};
}

// 8 -------------------------------------------------------------------------

inline Outcome sampled_convergence() {
    const double g = 0.99;
    GridworldSpec spec;
    spec.side = 5;
    const auto mdp = gridworld_mdp(spec);
    const auto dist = CoverageDistribution::uniform_state_action(mdp);
    const auto a = gridworld_reward(5, GridReward::DirtPath, g);
    const auto b = gridworld_reward(5, GridReward::CliffWalk, g);
    const double exact = epic_exact(a, b, dist, g);
    const auto fa = tabular_reward_function(a), fb = tabular_reward_function(b);
    const auto sampler = tabular_sampler(dist);

    std::vector<double> mae;
    double final_err = 0.0;
    std::string trace;
    for (Eigen::Index n : {512, 2048, 8192, 16384}) {
        SampledEpicConfig cfg;
        cfg.n_v = cfg.n_m = n;
        cfg.n_seeds = 30;
        cfg.seed = 808;
        cfg.bootstrap.n_resamples = 1000;
        const auto est = epic_sampled(fa, fb, sampler, g, cfg);
        double err = 0.0;
        for (double v : est.seed_values) err += std::abs(v - exact);
        mae.push_back(err / double(est.seed_values.size()));
        final_err = std::abs(est.value - exact);
        trace += fmt(" %lld:%.2e", (long long)n, mae.back());
    }
    bool monotone = true;
    for (std::size_t k = 1; k < mae.size(); ++k) monotone = monotone && mae[k] <= mae[k - 1];
    return {monotone && final_err < tol::kSampledVsExact,
            fmt("|sampled - exact| = %.3g at N=16384 (exact %.6f); MAE by N%s", final_err, exact,
                trace.c_str())};
}

// 9 -------------------------------------------------------------------------

inline Outcome pointmass_equivalent_pair() {
    PointMassConfig pm;
    const auto dense = pointmass_reward(pm, PointMassReward::Dense, false);
    const auto sparse = pointmass_reward(pm, PointMassReward::Sparse, false);
    const auto eps = pointmass_rollout(pm, pointmass_uniform_policy(pm), 100, 1000, 909);
    const auto sampler = dataset_sampler(concatenate_transitions(eps));

    // States are continuous, so canonicalization costs N_V * N_M reward calls per seed.
    SampledEpicConfig ecfg;
    ecfg.n_v = ecfg.n_m = 4096;
    ecfg.n_seeds = 10;
    ecfg.seed = 909;
    ecfg.bootstrap.n_resamples = 1000;
    const auto epic = epic_sampled(dense, sparse, sampler, pm.discount, ecfg);

    NpecApproxConfig ncfg;
    ncfg.seed = 909;
    ncfg.bootstrap.n_resamples = 1000;
    const auto npec = npec_approx_gradient(dense, sparse, sampler, pm.discount, ncfg);
    const bool pass = epic.failures.empty() && npec.failures.empty() &&
                      epic.value < tol::kPointMassEpic &&
                      npec.value >= tol::kNpecOverEpic * epic.value;
    return {pass, fmt("EPIC = %.3g (CI %.3g..%.3g), NPEC = %.4f (CI %.4f..%.4f)", epic.value,
                      epic.ci_lower, epic.ci_upper, npec.value, npec.ci_lower, npec.ci_upper)};
}

// 10 ------------------------------------------------------------------------

inline Outcome npec_counterexample() {
    const TransitionShape shape{2, 1};
    RewardTable a(shape), b(shape);
    a(1, 0, 1) = 2.0;
    b(0, 0, 0) = 1.0;
    b(1, 0, 1) = 1.0;
    const auto dist = CoverageDistribution::from_joint(shape, {0.5, 0.0, 0.0, 0.5});
    const double ab = npec_normalized(a, b, dist, 1.0, 1.0);
    const double ba = npec_normalized(b, a, dist, 1.0, 1.0);
    return {std::abs(ab - 0.5) <= tol::kCounterexample && std::abs(ba - 1.0) <= tol::kCounterexample,
            fmt("NPEC(A, B) = %.15g, NPEC(B, A) = %.15g", ab, ba)};
}

// 11 ------------------------------------------------------------------------

/// Returns of the four one-step episodes, written out by hand.
inline std::vector<double> toy_returns(const RewardTable& base, double c) {
    std::vector<double> out;
    for (auto s : {fixtures::kX, fixtures::kY})
        for (auto t : {fixtures::kT1, fixtures::kT2})
            out.push_back(base(s, 0, t) - (s == fixtures::kX ? c : 0.0));
    return out;
}

inline Outcome erc_pathology() {
    const double g = 0.9;
    const auto ra = fixtures::erc_toy_reward(1.0, 0.0, 0.5, 2.0);
    const auto rb = fixtures::erc_toy_reward(0.0, 1.5, 1.0, -1.0);
    const auto eps = fixtures::erc_toy_episodes();
    BootstrapConfig boot;
    boot.n_resamples = 200;

    bool pass = true;
    double oracle_err = 0.0;
    std::string trace;
    for (double sign : {1.0, -1.0}) {
        const double limit = sign > 0 ? 0.0 : 1.0;
        double prev_gap = std::numeric_limits<double>::infinity();
        trace += sign > 0 ? " equal-sign:" : "; opposite-sign:";
        for (double c : {1e2, 1e4, 1e6}) {
            const auto sa = ra + shaping_only(fixtures::erc_toy_potential(c), g, ra.shape());
            const auto sb = rb + shaping_only(fixtures::erc_toy_potential(sign * c), g, rb.shape());
            const double d = erc_distance(tabular_reward_function(sa), tabular_reward_function(sb),
                                          eps, g, boot)
                                 .value;
            const double expected =
                oracle::pearson_distance(toy_returns(ra, c), toy_returns(rb, sign * c));
            oracle_err = std::max(oracle_err, std::abs(d - expected));
            const double gap = std::abs(d - limit);
            pass = pass && gap <= prev_gap;
            prev_gap = gap;
            trace += fmt(" %.0e->%.6g", c, d);
        }
        pass = pass && prev_gap <= tol::kErcLimit;
    }
    pass = pass && oracle_err <= tol::kErcOracle;
    return {pass, fmt("max |ERC - oracle| = %.3g;%s", oracle_err, trace.c_str())};
}

// 12 ------------------------------------------------------------------------

inline Outcome mlp_gradient_check() {
    Rng rng = make_rng(1212);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index dim = 1 + trial % 4;
        auto net = TinyMlp::standard(dim);
        net.init_xavier(rng);
        for (Eigen::Index i = 0; i < net.n_params(); ++i) net.params()(i) += 0.1 * n(rng);
        Eigen::MatrixXd X(8, dim);
        Eigen::VectorXd w(8);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = n(rng);
        TinyMlp::Cache cache;
        net.forward(X, &cache);
        const Eigen::VectorXd grad = net.backward(cache, w);
        const double h = 1e-6;
        Eigen::VectorXd fd(net.n_params());
        for (Eigen::Index i = 0; i < net.n_params(); ++i) {
            const double orig = net.params()(i);
            net.params()(i) = orig + h;
            const double up = w.dot(net.forward(X));
            net.params()(i) = orig - h;
            const double down = w.dot(net.forward(X));
            net.params()(i) = orig;
            fd(i) = (up - down) / (2 * h);
        }
        worst = std::max(worst, (grad - fd).norm() / std::max(1e-12, fd.norm()));
    }
    return {worst < tol::kMlpRelative, fmt("max relative error = %.3g over 100 draws", worst)};
}

} // namespace detail

struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

inline constexpr int kCriteria = 12;

/// Runs the listed criteria (all of them when `which` is empty) in order and
/// calls `on_done` after each one.
inline std::vector<CriterionResult>
run(const std::vector<int>& which = {},
    const std::function<void(const CriterionResult&)>& on_done = {}) {
    using namespace detail;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"equivalence invariance", equivalence_invariance},
        {"gridworld sparse/dense and dirt_path/cliff_walk", gridworld_figure},
        {"pseudometric axioms", pseudometric_axioms},
        {"DDSR at p=2 equals EPIC", ddsr_matches_epic},
        {"canonical reward has mean zero", canonical_mean_zero},
        {"perturbation norm closed form", perturbation_closed_form},
        {"regret bound", regret_bound},
        {"sampled EPIC converges on 5x5 gridworld", sampled_convergence},
        {"pointmass equivalent pair", pointmass_equivalent_pair},
        {"NPEC asymmetry counterexample", npec_counterexample},
        {"ERC shaping pathology", erc_pathology},
        {"TinyMlp gradient check", mlp_gradient_check},
    };
    std::vector<int> order = which;
    if (order.empty())
        for (int i = 1; i <= kCriteria; ++i) order.push_back(i);
    std::vector<CriterionResult> out;
    for (int k : order) {
        if (k < 1 || k > kCriteria)
            throw ValidationError("acceptance criterion must be in 1.." + std::to_string(kCriteria));
        const auto& [name, fn] = criteria[std::size_t(k - 1)];
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        CriterionResult r{k, name, o.pass, o.detail,
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
        if (on_done) on_done(r);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string format_line(const CriterionResult& r) {
    return detail::fmt("%s %2d %s: %s (%.1f s)", r.pass ? "PASS" : "FAIL", r.index, r.name.c_str(),
                       r.detail.c_str(), r.seconds);
}

} // namespace epic::acceptance
