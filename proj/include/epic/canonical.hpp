#pragma once

// Canonically shaped rewards:
//
//   C(R)(s, a, s') = R(s, a, s') + E[g R(s', A, S') - R(s, A, S') - g R(S, A, S')]
//
// with S, S' ~ D_S and A ~ D_A independent. Potential shaping of R leaves C(R)
// unchanged.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <vector>

#include "epic/core.hpp"
#include "epic/reward_function.hpp"

namespace epic {

struct CanonicalRewardTable {
    RewardTable values;
    std::vector<double> state_dist;
    std::vector<double> action_dist;
    double discount = 0.0;
};

namespace detail {

inline void check_marginals(const RewardTable& reward, std::span<const double> ds,
                            std::span<const double> da) {
    if (ds.size() != reward.n_states() || da.size() != reward.n_actions())
        throw DimensionError("canonicalize: distribution sizes do not match the reward");
    check_distribution(ds, "state distribution");
    check_distribution(da, "action distribution");
}

/// E_{A ~ D_A, S' ~ D_S}[R(x, A, S')] for every state x.
inline std::vector<double> expected_from_state(const RewardTable& reward,
                                               std::span<const double> ds,
                                               std::span<const double> da) {
    std::vector<double> out(reward.n_states());
    for (std::size_t x = 0; x < reward.n_states(); ++x) {
        KahanSum acc;
        for (std::size_t u = 0; u < reward.n_actions(); ++u)
            for (std::size_t t = 0; t < reward.n_states(); ++t)
                acc.add(da[u] * ds[t] * reward(x, u, t));
        out[x] = acc.value();
    }
    return out;
}

} // namespace detail

inline CanonicalRewardTable canonicalize_exact(const RewardTable& reward,
                                               std::span<const double> state_dist,
                                               std::span<const double> action_dist,
                                               double discount) {
    detail::check_marginals(reward, state_dist, action_dist);
    const auto from = detail::expected_from_state(reward, state_dist, action_dist);
    detail::KahanSum mean_acc;
    for (std::size_t x = 0; x < from.size(); ++x) mean_acc.add(state_dist[x] * from[x]);
    const double mean = mean_acc.value();

    CanonicalRewardTable out{RewardTable(reward.shape()),
                             {state_dist.begin(), state_dist.end()},
                             {action_dist.begin(), action_dist.end()},
                             discount};
    for (std::size_t s = 0; s < reward.n_states(); ++s)
        for (std::size_t a = 0; a < reward.n_actions(); ++a)
            for (std::size_t t = 0; t < reward.n_states(); ++t)
                out.values(s, a, t) =
                    reward(s, a, t) + discount * from[t] - from[s] - discount * mean;
    return out;
}

inline CanonicalRewardTable canonicalize_exact(const RewardTable& reward,
                                               const CoverageDistribution& dist, double discount) {
    return canonicalize_exact(reward, dist.state_dist(), dist.action_dist(), discount);
}

/// Closed form of || C(R + nu) - R - nu - (C(R) - R) ||_inf for the single-entry
/// perturbation nu = lambda * 1[(s, a, s') = (x, u, x')].
inline double canonical_perturbation_norm(std::span<const double> state_dist,
                                          std::span<const double> action_dist, std::size_t x,
                                          std::size_t u, std::size_t x_next, double lambda,
                                          double discount) {
    if (state_dist.size() < 2)
        throw ValidationError("canonical_perturbation_norm: needs at least two states");
    if (x >= state_dist.size() || x_next >= state_dist.size() || u >= action_dist.size())
        throw DimensionError("canonical_perturbation_norm: index out of range");
    return std::abs(lambda) * (1.0 + discount * state_dist[x]) * action_dist[u] *
           state_dist[x_next];
}

/// Monte-Carlo canonicalization over a batch B_V, with the expectations replaced
/// by means over B_M. The constant E[g R(S, A, S')] is dropped, so the result
/// is the canonical reward shifted by a single scalar.
///
/// The per-state mean over B_M is evaluated once per distinct state in B_V,
/// which is what makes tabular and low-cardinality inputs cheap.
inline Eigen::VectorXd canonicalize_sampled(const RewardFunction& reward,
                                            const TransitionBatch& batch_v,
                                            const StateActionBatch& batch_m, double discount) {
    const auto n_m = batch_m.size();
    if (n_m < 1) throw InsufficientDataError("canonicalize_sampled: empty mean batch");
    if (batch_m.actions.rows() != n_m)
        throw DimensionError("canonicalize_sampled: mean batch rows disagree");

    const auto dim = batch_v.states.cols();
    std::map<std::vector<double>, Eigen::Index> ids;
    std::vector<Eigen::Index> start_id(std::size_t(batch_v.size())),
        next_id(std::size_t(batch_v.size()));
    auto intern = [&](const auto& row) {
        std::vector<double> key(static_cast<std::size_t>(dim));
        for (Eigen::Index k = 0; k < dim; ++k) key[std::size_t(k)] = row(k);
        auto [it, inserted] = ids.emplace(std::move(key), Eigen::Index(ids.size()));
        return it->second;
    };
    for (Eigen::Index i = 0; i < batch_v.size(); ++i) {
        start_id[std::size_t(i)] = intern(batch_v.states.row(i));
        next_id[std::size_t(i)] = intern(batch_v.next_states.row(i));
    }

    Eigen::VectorXd mean_from(Eigen::Index(ids.size()));
    TransitionBatch probe{Eigen::MatrixXd(n_m, dim), batch_m.actions, batch_m.states};
    for (const auto& [key, id] : ids) {
        for (Eigen::Index k = 0; k < dim; ++k) probe.states.col(k).setConstant(key[std::size_t(k)]);
        const Eigen::VectorXd r = reward(probe);
        detail::KahanSum acc;
        for (Eigen::Index j = 0; j < n_m; ++j) acc.add(r(j));
        mean_from(id) = acc.value() / double(n_m);
    }

    Eigen::VectorXd out = reward(batch_v);
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out(i) += discount * mean_from(next_id[std::size_t(i)]) - mean_from(start_id[std::size_t(i)]);
    return out;
}

} // namespace epic
