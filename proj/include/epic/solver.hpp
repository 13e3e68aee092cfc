#pragma once

// Tabular value iteration, exact policy returns, and the empirical check of the
// EPIC regret bound.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "epic/core.hpp"
#include "epic/distances.hpp"

namespace epic {

struct ValueSolution {
    std::vector<double> values;
    /// Greedy action set per state: every action within the tie tolerance of the max.
    std::vector<std::vector<std::size_t>> greedy;
    std::vector<std::vector<double>> q_values;
    int iterations = 0;
    double residual = 0.0;

    /// Deterministic policy taking the lowest-index greedy action.
    Eigen::MatrixXd greedy_policy(std::size_t n_actions) const {
        Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(Eigen::Index(values.size()),
                                                   Eigen::Index(n_actions));
        for (std::size_t s = 0; s < values.size(); ++s)
            pi(Eigen::Index(s), Eigen::Index(greedy[s].front())) = 1.0;
        return pi;
    }
};

struct ValueIterationOptions {
    double tol = 1e-10;
    double tie_tol = 1e-9;
    int max_iter = 1'000'000;
};

namespace detail {

inline void check_pair(const TabularMdp& mdp, const RewardTable& reward) {
    if (!(mdp.shape() == reward.shape())) throw DimensionError("MDP and reward shapes differ");
}

/// Q(s, a) = sum_s' T(s, a, s') (R(s, a, s') + discount V(s')).
inline std::vector<std::vector<double>> q_from_values(const TabularMdp& mdp,
                                                      const RewardTable& reward,
                                                      const std::vector<double>& v) {
    const auto ns = mdp.n_states(), na = mdp.n_actions();
    std::vector<std::vector<double>> q(ns, std::vector<double>(na));
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a) {
            double acc = 0.0;
            for (std::size_t t = 0; t < ns; ++t) {
                const double p = mdp.transition(s, a, t);
                if (p != 0.0) acc += p * (reward(s, a, t) + mdp.discount() * v[t]);
            }
            q[s][a] = acc;
        }
    return q;
}

} // namespace detail

/// Stops once the Bellman residual guarantees |V - V*| <= tol in max norm.
inline ValueSolution value_iteration(const TabularMdp& mdp, const RewardTable& reward,
                                     const ValueIterationOptions& opt = {}) {
    detail::check_pair(mdp, reward);
    const double g = mdp.discount();
    const double stop = g > 0.0 ? opt.tol * (1.0 - g) / g : opt.tol;
    ValueSolution sol;
    sol.values.assign(mdp.n_states(), 0.0);
    for (;;) {
        if (sol.iterations >= opt.max_iter)
            throw ConvergenceError("value_iteration: no convergence within max_iter");
        ++sol.iterations;
        const auto q = detail::q_from_values(mdp, reward, sol.values);
        double resid = 0.0;
        for (std::size_t s = 0; s < q.size(); ++s) {
            const double best = *std::max_element(q[s].begin(), q[s].end());
            resid = std::max(resid, std::abs(best - sol.values[s]));
            sol.values[s] = best;
        }
        sol.residual = resid;
        if (resid <= stop) break;
    }
    sol.q_values = detail::q_from_values(mdp, reward, sol.values);
    sol.greedy.resize(mdp.n_states());
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        const auto& qs = sol.q_values[s];
        const double best = *std::max_element(qs.begin(), qs.end());
        for (std::size_t a = 0; a < qs.size(); ++a)
            if (qs[a] >= best - opt.tie_tol) sol.greedy[s].push_back(a);
    }
    return sol;
}

/// Exact expected discounted return from the initial distribution, by solving
/// (I - discount P_pi) V = r_pi.
inline double policy_return(const TabularMdp& mdp, const RewardTable& reward,
                            const Eigen::MatrixXd& policy) {
    detail::check_pair(mdp, reward);
    const auto ns = Eigen::Index(mdp.n_states()), na = Eigen::Index(mdp.n_actions());
    if (policy.rows() != ns || policy.cols() != na)
        throw DimensionError("policy_return: policy shape mismatch");
    for (Eigen::Index s = 0; s < ns; ++s)
        detail::check_distribution(std::vector<double>(policy.row(s).begin(), policy.row(s).end()),
                                   "policy row", 1e-9);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ns, ns);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(ns);
    for (Eigen::Index s = 0; s < ns; ++s)
        for (Eigen::Index a = 0; a < na; ++a) {
            const double pa = policy(s, a);
            if (pa == 0.0) continue;
            for (Eigen::Index t = 0; t < ns; ++t) {
                const double p = pa * mdp.transition(std::size_t(s), std::size_t(a), std::size_t(t));
                P(s, t) += p;
                r(s) += p * reward(std::size_t(s), std::size_t(a), std::size_t(t));
            }
        }
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(ns, ns) - mdp.discount() * P;
    const auto lu = M.fullPivLu();
    if (!lu.isInvertible()) throw ConvergenceError("policy_return: singular Bellman system");
    const Eigen::VectorXd v = lu.solve(r);
    const Eigen::Map<const Eigen::VectorXd> d0(mdp.initial_dist().data(), ns);
    return d0.dot(v);
}

struct RegretBoundReport {
    double epic = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double coverage_constant = 0.0;
    double reward_norm = 0.0;
    bool holds = false;
    /// Set when a canonical reward is constant and EPIC is undefined.
    bool degenerate = false;
};

/// Checks G_A(pi_A*) - G_A(pi_B*) <= 16 K ||R_A||_2 / (1 - discount) * EPIC(R_A, R_B)
/// with K = |S|^2 |A|, which is only a valid constant when `dist` is uniform
/// over (s, a, s').
inline RegretBoundReport regret_bound_check(const TabularMdp& mdp, const RewardTable& a,
                                            const RewardTable& b,
                                            const CoverageDistribution& dist) {
    detail::check_pair(mdp, a);
    detail::check_pair(mdp, b);
    if (!(dist.shape() == mdp.shape())) throw DimensionError("coverage shape mismatch");
    const double gamma = mdp.discount();
    RegretBoundReport rep;
    rep.coverage_constant = double(mdp.n_states() * mdp.n_states() * mdp.n_actions());
    const RewardTable zero(a.shape());
    rep.reward_norm = direct_distance_lp(a, zero, dist, 2.0);
    try {
        rep.epic = epic_exact(a, b, dist, gamma);
    } catch (const DegenerateError&) {
        // With EPIC at its maximum the bound still dominates every possible regret.
        rep.degenerate = true;
        rep.epic = 1.0;
    }
    const auto sol_a = value_iteration(mdp, a);
    const auto sol_b = value_iteration(mdp, b);
    rep.lhs = policy_return(mdp, a, sol_a.greedy_policy(mdp.n_actions())) -
              policy_return(mdp, a, sol_b.greedy_policy(mdp.n_actions()));
    rep.rhs = 16.0 * rep.coverage_constant * rep.reward_norm / (1.0 - gamma) * rep.epic;
    rep.holds = rep.lhs <= rep.rhs + 1e-9;
    return rep;
}

inline RegretBoundReport regret_bound_check(const TabularMdp& mdp, const RewardTable& a,
                                            const RewardTable& b) {
    return regret_bound_check(mdp, a, b, CoverageDistribution::uniform(mdp.shape()));
}

} // namespace epic
