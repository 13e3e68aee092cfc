#pragma once

// Built-in environments: an n x n gridworld with a family of hand-designed
// rewards, the 1-D PointMass task, and a seeded random MDP generator.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "epic/core.hpp"
#include "epic/reward_function.hpp"
#include "epic/sampling.hpp"

namespace epic {

// ---------------------------------------------------------------------------
// Gridworld
// ---------------------------------------------------------------------------

enum class GridReward { SparseGoal, DenseGoal, DirtPath, CliffWalk, Zero, SparsePenalty };

enum class GridAction : std::size_t { Left = 0, Right, Up, Down, Stay };
inline constexpr std::size_t kGridActions = 5;

struct GridworldSpec {
    std::size_t side = 3;
    GridReward reward = GridReward::SparseGoal;
    bool slippery = false;
    double p_slip = 0.3;
    double discount = 0.99;
};

inline const std::vector<std::pair<std::string, GridReward>>& gridworld_reward_names() {
    static const std::vector<std::pair<std::string, GridReward>> names{
        {"sparse_goal", GridReward::SparseGoal}, {"dense_goal", GridReward::DenseGoal},
        {"dirt_path", GridReward::DirtPath},     {"cliff_walk", GridReward::CliffWalk},
        {"zero", GridReward::Zero},              {"sparse_penalty", GridReward::SparsePenalty}};
    return names;
}

inline GridReward parse_grid_reward(std::string_view name) {
    for (const auto& [n, r] : gridworld_reward_names())
        if (n == name) return r;
    throw ValidationError("unknown gridworld reward '" + std::string(name) + "'");
}

/// Row-major cell index; row 0 is the top row.
struct GridLayout {
    std::size_t side;

    std::size_t cell(std::size_t row, std::size_t col) const { return row * side + col; }
    std::size_t row(std::size_t s) const { return s / side; }
    std::size_t col(std::size_t s) const { return s % side; }
    std::size_t middle_row() const { return side / 2; }
    std::size_t goal() const { return cell(middle_row(), side - 1); }
    std::size_t start() const { return cell(middle_row(), 0); }

    /// Destination of a deterministic move; moves off the grid stay in place.
    std::size_t move(std::size_t s, GridAction a) const {
        const auto r = row(s), c = col(s);
        switch (a) {
        case GridAction::Left: return c == 0 ? s : cell(r, c - 1);
        case GridAction::Right: return c + 1 == side ? s : cell(r, c + 1);
        case GridAction::Up: return r == 0 ? s : cell(r - 1, c);
        case GridAction::Down: return r + 1 == side ? s : cell(r + 1, c);
        case GridAction::Stay: return s;
        }
        return s;
    }
};

namespace detail {

inline std::array<GridAction, 2> perpendicular(GridAction a) {
    if (a == GridAction::Left || a == GridAction::Right) return {GridAction::Up, GridAction::Down};
    return {GridAction::Left, GridAction::Right};
}

/// Reward for entering cell `next`; depends only on the destination.
inline double grid_cell_reward(const GridLayout& g, GridReward family, std::size_t next) {
    const bool at_goal = next == g.goal();
    const double goal = at_goal ? 1.0 : 0.0;
    const auto r = g.row(next);
    switch (family) {
    case GridReward::SparseGoal: return goal;
    case GridReward::Zero: return 0.0;
    case GridReward::DirtPath:
        // Off the middle-row path every cell is dirty.
        return goal + (r != g.middle_row() ? -1.0 : 0.0);
    case GridReward::CliffWalk:
        if (r + 1 == g.side) return -4.0;
        return goal + (r != g.middle_row() ? -1.0 : 0.0);
    case GridReward::SparsePenalty:
        return goal + (next == g.cell(g.side - 1, g.side / 2) ? -1.0 : 0.0);
    case GridReward::DenseGoal: break;
    }
    return goal;
}

} // namespace detail

inline TabularMdp gridworld_mdp(const GridworldSpec& spec) {
    if (spec.side < 2) throw ValidationError("gridworld side must be >= 2");
    if (spec.slippery && !(spec.p_slip >= 0.0 && spec.p_slip <= 1.0))
        throw ValidationError("gridworld p_slip must lie in [0, 1]");
    const GridLayout g{spec.side};
    const TransitionShape shape{spec.side * spec.side, kGridActions};
    std::vector<double> transition(shape.size(), 0.0);
    for (std::size_t s = 0; s < shape.n_states; ++s)
        for (std::size_t a = 0; a < kGridActions; ++a) {
            const auto act = GridAction(a);
            const double slip = (spec.slippery && act != GridAction::Stay) ? spec.p_slip : 0.0;
            transition[shape.index(s, a, g.move(s, act))] += 1.0 - slip;
            if (slip > 0.0)
                for (auto side_step : detail::perpendicular(act))
                    transition[shape.index(s, a, g.move(s, side_step))] += 0.5 * slip;
        }
    std::vector<double> initial(shape.n_states, 0.0);
    initial[g.start()] = 1.0;
    return TabularMdp(shape.n_states, kGridActions, std::move(transition), std::move(initial),
                      spec.discount);
}

/// Potential used to build DenseGoal: negative Manhattan distance to the goal.
inline std::vector<double> gridworld_dense_potential(std::size_t side) {
    const GridLayout g{side};
    std::vector<double> phi(side * side);
    const auto gr = double(g.row(g.goal())), gc = double(g.col(g.goal()));
    for (std::size_t s = 0; s < phi.size(); ++s)
        phi[s] = -(std::abs(double(g.row(s)) - gr) + std::abs(double(g.col(s)) - gc));
    return phi;
}

inline constexpr double kDenseGoalScale = 2.0;

inline RewardTable gridworld_reward(std::size_t side, GridReward family, double discount) {
    const GridLayout g{side};
    const TransitionShape shape{side * side, kGridActions};
    if (family == GridReward::DenseGoal) {
        return apply_equivalence(gridworld_reward(side, GridReward::SparseGoal, discount),
                                 {kDenseGoalScale, gridworld_dense_potential(side)}, discount);
    }
    RewardTable out(shape);
    for (std::size_t s = 0; s < shape.n_states; ++s)
        for (std::size_t a = 0; a < shape.n_actions; ++a)
            for (std::size_t t = 0; t < shape.n_states; ++t)
                out(s, a, t) = detail::grid_cell_reward(g, family, t);
    return out;
}

inline std::pair<TabularMdp, RewardTable> build_gridworld(const GridworldSpec& spec) {
    return {gridworld_mdp(spec), gridworld_reward(spec.side, spec.reward, spec.discount)};
}

// ---------------------------------------------------------------------------
// PointMass
// ---------------------------------------------------------------------------

enum class PointMassReward { Sparse, Dense, Magnitude };

struct PointMassConfig {
    double position_bound = 1.0;
    double velocity_bound = 1.0;
    double action_bound = 1.0;
    double dt = 0.05;
    double goal_half_width = 0.05;
    double control_penalty = 1.0;
    /// Dense = Sparse + discount * phi(s') - phi(s) with phi(x, v) = -potential_scale * |x|.
    double potential_scale = 10.0;
    double discount = 0.99;
    /// Initial positions are uniform on [-init_position_range, init_position_range]; v0 = 0.
    double init_position_range = 1.0;
};

/// State is (position, velocity); the action is the acceleration.
inline Eigen::Vector2d pointmass_step(const PointMassConfig& cfg, const Eigen::Vector2d& state,
                                      double accel) {
    accel = std::clamp(accel, -cfg.action_bound, cfg.action_bound);
    const double x = std::clamp(state(0) + state(1) * cfg.dt, -cfg.position_bound,
                                cfg.position_bound);
    const double v = std::clamp(state(1) + accel * cfg.dt, -cfg.velocity_bound,
                                cfg.velocity_bound);
    return {x, v};
}

inline double pointmass_potential(const PointMassConfig& cfg, double position) {
    return -cfg.potential_scale * std::abs(position);
}

inline std::string pointmass_reward_name(PointMassReward family, bool control_penalty) {
    std::string base = family == PointMassReward::Sparse  ? "sparse"
                       : family == PointMassReward::Dense ? "dense"
                                                          : "magnitude";
    return base + (control_penalty ? "_ctrl" : "_no_ctrl");
}

inline RewardFunction pointmass_reward(const PointMassConfig& cfg, PointMassReward family,
                                       bool control_penalty) {
    return RewardFunction(
        2, 1,
        [cfg, family, control_penalty](const TransitionBatch& b) {
            Eigen::VectorXd out(b.size());
            for (Eigen::Index i = 0; i < b.size(); ++i) {
                const double x = b.states(i, 0), next_x = b.next_states(i, 0);
                double r = 0.0;
                switch (family) {
                case PointMassReward::Sparse:
                    r = std::abs(next_x) <= cfg.goal_half_width ? 1.0 : 0.0;
                    break;
                case PointMassReward::Dense:
                    r = (std::abs(next_x) <= cfg.goal_half_width ? 1.0 : 0.0) +
                        (cfg.discount * pointmass_potential(cfg, next_x) -
                         pointmass_potential(cfg, x));
                    break;
                case PointMassReward::Magnitude: r = -std::abs(next_x); break;
                }
                if (control_penalty) {
                    const double a = b.actions(i, 0);
                    r -= cfg.control_penalty * a * a;
                }
                out(i) = r;
            }
            return out;
        },
        pointmass_reward_name(family, control_penalty));
}

using PointMassPolicy = std::function<double(const Eigen::Vector2d&, Rng&)>;

inline PointMassPolicy pointmass_uniform_policy(const PointMassConfig& cfg) {
    return [bound = cfg.action_bound](const Eigen::Vector2d&, Rng& rng) {
        return std::uniform_real_distribution<double>(-bound, bound)(rng);
    };
}

/// Each episode draws from its own stream derived from (seed, episode index).
inline std::vector<Trajectory>
pointmass_rollout(const PointMassConfig& cfg, const PointMassPolicy& policy, Eigen::Index horizon,
                  std::size_t n_episodes, std::uint64_t seed,
                  std::optional<Eigen::Vector2d> initial_state = std::nullopt) {
    if (horizon < 1) throw ValidationError("pointmass_rollout: horizon must be >= 1");
    std::vector<Trajectory> out;
    out.reserve(n_episodes);
    for (std::size_t ep = 0; ep < n_episodes; ++ep) {
        Rng rng = make_rng(seed, ep);
        Eigen::Vector2d state;
        if (initial_state) {
            state = *initial_state;
        } else {
            std::uniform_real_distribution<double> init(-cfg.init_position_range,
                                                        cfg.init_position_range);
            state = {init(rng), 0.0};
        }
        Trajectory traj{Eigen::MatrixXd(horizon + 1, 2), Eigen::MatrixXd(horizon, 1)};
        traj.states.row(0) = state.transpose();
        for (Eigen::Index t = 0; t < horizon; ++t) {
            const double a = std::clamp(policy(state, rng), -cfg.action_bound, cfg.action_bound);
            state = pointmass_step(cfg, state, a);
            traj.actions(t, 0) = a;
            traj.states.row(t + 1) = state.transpose();
        }
        out.push_back(std::move(traj));
    }
    return out;
}

/// Positions and velocities uniform on their bounds, accelerations uniform, and
/// next states from the dynamics. D_S and D_A are the same uniform laws.
inline CoverageSampler pointmass_uniform_sampler(const PointMassConfig& cfg) {
    auto draw_states = [cfg](Eigen::Index n, Rng& rng) {
        std::uniform_real_distribution<double> x(-cfg.position_bound, cfg.position_bound);
        std::uniform_real_distribution<double> v(-cfg.velocity_bound, cfg.velocity_bound);
        Eigen::MatrixXd out(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, 0) = x(rng);
            out(i, 1) = v(rng);
        }
        return out;
    };
    auto draw_actions = [cfg](Eigen::Index n, Rng& rng) {
        std::uniform_real_distribution<double> a(-cfg.action_bound, cfg.action_bound);
        Eigen::MatrixXd out(n, 1);
        for (Eigen::Index i = 0; i < n; ++i) out(i, 0) = a(rng);
        return out;
    };
    CoverageSampler out;
    out.transitions = [cfg, draw_states, draw_actions](Eigen::Index n, Rng& rng) {
        TransitionBatch b{draw_states(n, rng), draw_actions(n, rng), Eigen::MatrixXd(n, 2)};
        for (Eigen::Index i = 0; i < n; ++i)
            b.next_states.row(i) =
                pointmass_step(cfg, b.states.row(i).transpose(), b.actions(i, 0)).transpose();
        return b;
    };
    out.state_actions = [draw_states, draw_actions](Eigen::Index n, Rng& rng) {
        StateActionBatch b;
        b.actions = draw_actions(n, rng);
        b.states = draw_states(n, rng);
        return b;
    };
    return out;
}

// ---------------------------------------------------------------------------
// Tabular rollouts and random MDPs
// ---------------------------------------------------------------------------

/// policy is |S| x |A|, rows are action distributions.
inline std::vector<Trajectory> tabular_rollout(const TabularMdp& mdp,
                                               const Eigen::MatrixXd& policy,
                                               Eigen::Index horizon, std::size_t n_episodes,
                                               std::uint64_t seed) {
    if (horizon < 1) throw ValidationError("tabular_rollout: horizon must be >= 1");
    const auto ns = mdp.n_states(), na = mdp.n_actions();
    if (std::size_t(policy.rows()) != ns || std::size_t(policy.cols()) != na)
        throw DimensionError("tabular_rollout: policy shape mismatch");
    std::discrete_distribution<std::size_t> init(mdp.initial_dist().begin(),
                                                 mdp.initial_dist().end());
    std::vector<std::discrete_distribution<std::size_t>> act, next;
    for (std::size_t s = 0; s < ns; ++s) {
        std::vector<double> row(na);
        for (std::size_t a = 0; a < na; ++a) row[a] = policy(Eigen::Index(s), Eigen::Index(a));
        act.emplace_back(row.begin(), row.end());
        for (std::size_t a = 0; a < na; ++a) {
            const auto r = mdp.row(s, a);
            next.emplace_back(r.begin(), r.end());
        }
    }
    std::vector<Trajectory> out;
    out.reserve(n_episodes);
    for (std::size_t ep = 0; ep < n_episodes; ++ep) {
        Rng rng = make_rng(seed, ep);
        Trajectory traj{Eigen::MatrixXd::Zero(horizon + 1, Eigen::Index(ns)),
                        Eigen::MatrixXd::Zero(horizon, Eigen::Index(na))};
        std::size_t s = init(rng);
        traj.states(0, Eigen::Index(s)) = 1.0;
        for (Eigen::Index t = 0; t < horizon; ++t) {
            const std::size_t a = act[s](rng);
            s = next[s * na + a](rng);
            traj.actions(t, Eigen::Index(a)) = 1.0;
            traj.states(t + 1, Eigen::Index(s)) = 1.0;
        }
        out.push_back(std::move(traj));
    }
    return out;
}

inline Eigen::MatrixXd uniform_policy(std::size_t n_states, std::size_t n_actions) {
    return Eigen::MatrixXd::Constant(Eigen::Index(n_states), Eigen::Index(n_actions),
                                     1.0 / double(n_actions));
}

/// Empirical joint over (s, a, s') from one-hot trajectories.
inline CoverageDistribution empirical_coverage(TransitionShape shape,
                                               const std::vector<Trajectory>& trajectories) {
    std::vector<double> joint(shape.size(), 0.0);
    double total = 0.0;
    for (const auto& t : trajectories)
        for (Eigen::Index i = 0; i < t.length(); ++i) {
            joint[shape.index(detail::decode_one_hot(t.states.row(i)),
                              detail::decode_one_hot(t.actions.row(i)),
                              detail::decode_one_hot(t.states.row(i + 1)))] += 1.0;
            total += 1.0;
        }
    if (total == 0.0) throw InsufficientDataError("empirical_coverage: no transitions");
    for (double& v : joint) v /= total;
    return CoverageDistribution::from_joint(shape, std::move(joint));
}

/// Dirichlet(1) transition rows and initial distribution; rewards iid U[-1, 1].
inline std::pair<TabularMdp, RewardTable> random_mdp(std::size_t n_states, std::size_t n_actions,
                                                     double discount, std::uint64_t seed) {
    if (n_states < 2 || n_actions < 1)
        throw ValidationError("random_mdp: need n_states >= 2 and n_actions >= 1");
    Rng rng = make_rng(seed);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    const TransitionShape shape{n_states, n_actions};
    auto dirichlet = [&](double* out, std::size_t n) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += out[i] = gamma(rng) + 1e-300;
        for (std::size_t i = 0; i < n; ++i) out[i] /= total;
    };
    std::vector<double> transition(shape.size());
    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t a = 0; a < n_actions; ++a)
            dirichlet(transition.data() + shape.index(s, a, 0), n_states);
    std::vector<double> initial(n_states);
    dirichlet(initial.data(), n_states);

    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    RewardTable reward(shape);
    for (double& v : reward.values()) v = unif(rng);
    return {TabularMdp(n_states, n_actions, std::move(transition), std::move(initial), discount),
            std::move(reward)};
}

} // namespace epic
