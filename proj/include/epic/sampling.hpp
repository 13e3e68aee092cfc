#pragma once

// Trajectories and seeded samplers over transitions for the sample-based
// distance estimators.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "epic/core.hpp"
#include "epic/reward_function.hpp"

namespace epic {

/// states has one more row than actions.
struct Trajectory {
    Eigen::MatrixXd states;
    Eigen::MatrixXd actions;

    Eigen::Index length() const { return actions.rows(); }

    TransitionBatch transitions() const {
        const auto n = length();
        return {states.topRows(n), actions, states.middleRows(1, n)};
    }
};

inline double discounted_return(const Trajectory& traj, const RewardFunction& reward,
                                double discount) {
    if (traj.length() == 0) return 0.0;
    const Eigen::VectorXd r = reward(traj.transitions());
    // Horner form keeps the sum in the natural t = 0..T-1 weighting.
    double g = 0.0;
    for (Eigen::Index t = r.size() - 1; t >= 0; --t) g = r(t) + discount * g;
    return g;
}

/// Pools every transition of `trajectories` into one batch.
inline TransitionBatch concatenate_transitions(const std::vector<Trajectory>& trajectories) {
    Eigen::Index total = 0;
    for (const auto& t : trajectories) total += t.length();
    if (trajectories.empty() || total == 0) throw InsufficientDataError("no transitions to pool");
    const auto ds = trajectories.front().states.cols();
    const auto da = trajectories.front().actions.cols();
    TransitionBatch out{Eigen::MatrixXd(total, ds), Eigen::MatrixXd(total, da),
                        Eigen::MatrixXd(total, ds)};
    Eigen::Index row = 0;
    for (const auto& t : trajectories) {
        const auto n = t.length();
        out.states.middleRows(row, n) = t.states.topRows(n);
        out.actions.middleRows(row, n) = t.actions;
        out.next_states.middleRows(row, n) = t.states.middleRows(1, n);
        row += n;
    }
    return out;
}

/// Seeded source of B_V (transitions from D) and B_M (draws from D_S x D_A).
struct CoverageSampler {
    std::function<TransitionBatch(Eigen::Index, Rng&)> transitions;
    std::function<StateActionBatch(Eigen::Index, Rng&)> state_actions;
};

/// Exact sampling from a tabular coverage distribution, one-hot encoded.
inline CoverageSampler tabular_sampler(const CoverageDistribution& dist) {
    const auto shape = dist.shape();
    auto joint = std::make_shared<std::discrete_distribution<std::size_t>>(dist.joint().begin(),
                                                                            dist.joint().end());
    auto states = std::make_shared<std::discrete_distribution<std::size_t>>(
        dist.state_dist().begin(), dist.state_dist().end());
    auto actions = std::make_shared<std::discrete_distribution<std::size_t>>(
        dist.action_dist().begin(), dist.action_dist().end());
    const auto ns = Eigen::Index(shape.n_states), na = Eigen::Index(shape.n_actions);

    CoverageSampler out;
    out.transitions = [=](Eigen::Index n, Rng& rng) {
        TransitionBatch b{Eigen::MatrixXd::Zero(n, ns), Eigen::MatrixXd::Zero(n, na),
                          Eigen::MatrixXd::Zero(n, ns)};
        auto d = *joint;
        for (Eigen::Index i = 0; i < n; ++i) {
            std::size_t flat = d(rng);
            const auto next = flat % shape.n_states;
            flat /= shape.n_states;
            const auto a = flat % shape.n_actions;
            const auto s = flat / shape.n_actions;
            b.states(i, Eigen::Index(s)) = 1.0;
            b.actions(i, Eigen::Index(a)) = 1.0;
            b.next_states(i, Eigen::Index(next)) = 1.0;
        }
        return b;
    };
    out.state_actions = [=](Eigen::Index n, Rng& rng) {
        StateActionBatch b{Eigen::MatrixXd::Zero(n, na), Eigen::MatrixXd::Zero(n, ns)};
        auto ds = *states;
        auto da = *actions;
        for (Eigen::Index i = 0; i < n; ++i) {
            b.actions(i, Eigen::Index(da(rng))) = 1.0;
            b.states(i, Eigen::Index(ds(rng))) = 1.0;
        }
        return b;
    };
    return out;
}

/// Resamples a fixed pool of transitions with replacement. D_S and D_A are the
/// empirical start-state and action marginals of the pool, sampled independently.
inline CoverageSampler dataset_sampler(TransitionBatch pool) {
    if (pool.size() == 0) throw InsufficientDataError("dataset_sampler: empty pool");
    auto data = std::make_shared<const TransitionBatch>(std::move(pool));
    CoverageSampler out;
    out.transitions = [data](Eigen::Index n, Rng& rng) {
        std::uniform_int_distribution<Eigen::Index> pick(0, data->size() - 1);
        TransitionBatch b{Eigen::MatrixXd(n, data->states.cols()),
                          Eigen::MatrixXd(n, data->actions.cols()),
                          Eigen::MatrixXd(n, data->next_states.cols())};
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = pick(rng);
            b.states.row(i) = data->states.row(k);
            b.actions.row(i) = data->actions.row(k);
            b.next_states.row(i) = data->next_states.row(k);
        }
        return b;
    };
    out.state_actions = [data](Eigen::Index n, Rng& rng) {
        std::uniform_int_distribution<Eigen::Index> pick(0, data->size() - 1);
        StateActionBatch b{Eigen::MatrixXd(n, data->actions.cols()),
                           Eigen::MatrixXd(n, data->states.cols())};
        for (Eigen::Index i = 0; i < n; ++i) {
            b.actions.row(i) = data->actions.row(pick(rng));
            b.states.row(i) = data->states.row(pick(rng));
        }
        return b;
    };
    return out;
}

} // namespace epic
