#pragma once

// Core representations: finite MDPs without reward, dense reward tables,
// coverage distributions and the positive-affine + potential-shaping
// equivalence transform.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace epic {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

/// Raised when a quantity needs non-zero variance (or norm) and gets none.
/// `argument` names the offending input, e.g. "a" or "b".
struct DegenerateError : Error {
    DegenerateError(std::string argument, const std::string& what)
        : Error(what), argument(std::move(argument)) {}
    std::string argument;
};

struct ConvergenceError : Error {
    using Error::Error;
};

struct InsufficientDataError : Error {
    using Error::Error;
};

namespace detail {

// Neumaier compensated summation.
class KahanSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline void check_distribution(std::span<const double> p, const char* name, double tol = 1e-12) {
    if (p.empty()) throw ValidationError(std::string(name) + ": empty distribution");
    KahanSum total;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError(std::string(name) + ": negative or non-finite probability");
        total.add(v);
    }
    if (std::abs(total.value() - 1.0) > tol)
        throw ValidationError(std::string(name) + ": probabilities sum to " +
                              std::to_string(total.value()) + ", expected 1");
}

} // namespace detail

/// Shape of a dense (s, a, s') tensor.
struct TransitionShape {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;

    std::size_t size() const { return n_states * n_actions * n_states; }
    std::size_t index(std::size_t s, std::size_t a, std::size_t next) const {
        return (s * n_actions + a) * n_states + next;
    }
    friend bool operator==(const TransitionShape&, const TransitionShape&) = default;
};

/// Finite MDP without a reward function.
class TabularMdp {
  public:
    TabularMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> transition,
               std::vector<double> initial_dist, double discount)
        : shape_{n_states, n_actions}, transition_(std::move(transition)),
          initial_(std::move(initial_dist)), discount_(discount) {
        if (n_states == 0 || n_actions == 0)
            throw ValidationError("TabularMdp: n_states and n_actions must be positive");
        if (transition_.size() != shape_.size())
            throw DimensionError("TabularMdp: transition tensor has " +
                                 std::to_string(transition_.size()) + " entries, expected " +
                                 std::to_string(shape_.size()));
        if (initial_.size() != n_states)
            throw DimensionError("TabularMdp: initial_dist length mismatch");
        if (!(discount_ >= 0.0 && discount_ < 1.0))
            throw ValidationError("TabularMdp: discount must lie in [0, 1)");
        for (std::size_t s = 0; s < n_states; ++s)
            for (std::size_t a = 0; a < n_actions; ++a)
                detail::check_distribution(row(s, a), "TabularMdp transition row");
        detail::check_distribution(initial_, "TabularMdp initial_dist");
    }

    std::size_t n_states() const { return shape_.n_states; }
    std::size_t n_actions() const { return shape_.n_actions; }
    const TransitionShape& shape() const { return shape_; }
    double discount() const { return discount_; }
    const std::vector<double>& initial_dist() const { return initial_; }
    const std::vector<double>& transition() const { return transition_; }

    double transition(std::size_t s, std::size_t a, std::size_t next) const {
        return transition_[shape_.index(s, a, next)];
    }
    std::span<const double> row(std::size_t s, std::size_t a) const {
        return {transition_.data() + shape_.index(s, a, 0), shape_.n_states};
    }

  private:
    TransitionShape shape_;
    std::vector<double> transition_;
    std::vector<double> initial_;
    double discount_;
};

/// Dense reward over (s, a, s'). Every entry is finite.
class RewardTable {
  public:
    RewardTable() = default;
    explicit RewardTable(TransitionShape shape) : shape_(shape), values_(shape.size(), 0.0) {}
    RewardTable(TransitionShape shape, std::vector<double> values)
        : shape_(shape), values_(std::move(values)) {
        if (values_.size() != shape_.size())
            throw DimensionError("RewardTable: expected " + std::to_string(shape_.size()) +
                                 " entries, got " + std::to_string(values_.size()));
        for (double v : values_)
            if (!std::isfinite(v)) throw ValidationError("RewardTable: non-finite entry");
    }

    const TransitionShape& shape() const { return shape_; }
    std::size_t n_states() const { return shape_.n_states; }
    std::size_t n_actions() const { return shape_.n_actions; }
    std::size_t size() const { return values_.size(); }

    double operator()(std::size_t s, std::size_t a, std::size_t next) const {
        return values_[shape_.index(s, a, next)];
    }
    double& operator()(std::size_t s, std::size_t a, std::size_t next) {
        return values_[shape_.index(s, a, next)];
    }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

  private:
    TransitionShape shape_;
    std::vector<double> values_;
};

inline void require_same_shape(const RewardTable& a, const RewardTable& b) {
    if (!(a.shape() == b.shape())) throw DimensionError("reward tables have different shapes");
}

inline RewardTable operator+(const RewardTable& a, const RewardTable& b) {
    require_same_shape(a, b);
    RewardTable out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] + b.values()[i];
    return out;
}

inline RewardTable operator*(double k, const RewardTable& a) {
    RewardTable out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = k * a.values()[i];
    return out;
}

/// Coverage distribution over transitions together with the state and action
/// distributions used for canonicalization.
class CoverageDistribution {
  public:
    CoverageDistribution(TransitionShape shape, std::vector<double> joint,
                         std::vector<double> state_dist, std::vector<double> action_dist)
        : shape_(shape), joint_(std::move(joint)), state_(std::move(state_dist)),
          action_(std::move(action_dist)) {
        if (joint_.size() != shape_.size() || state_.size() != shape_.n_states ||
            action_.size() != shape_.n_actions)
            throw DimensionError("CoverageDistribution: shape mismatch");
        detail::check_distribution(joint_, "coverage joint");
        detail::check_distribution(state_, "coverage state distribution");
        detail::check_distribution(action_, "coverage action distribution");
    }

    /// D_S and D_A are the start-state and action marginals of `joint`.
    static CoverageDistribution from_joint(TransitionShape shape, std::vector<double> joint) {
        if (joint.size() != shape.size()) throw DimensionError("coverage joint: shape mismatch");
        std::vector<double> ds(shape.n_states, 0.0), da(shape.n_actions, 0.0);
        for (std::size_t s = 0; s < shape.n_states; ++s)
            for (std::size_t a = 0; a < shape.n_actions; ++a)
                for (std::size_t t = 0; t < shape.n_states; ++t) {
                    const double p = joint[shape.index(s, a, t)];
                    ds[s] += p;
                    da[a] += p;
                }
        return {shape, std::move(joint), std::move(ds), std::move(da)};
    }

    /// Joint D_S x D_A x D_S.
    static CoverageDistribution product(std::vector<double> state_dist,
                                        std::vector<double> action_dist) {
        const TransitionShape shape{state_dist.size(), action_dist.size()};
        std::vector<double> joint(shape.size());
        for (std::size_t s = 0; s < shape.n_states; ++s)
            for (std::size_t a = 0; a < shape.n_actions; ++a)
                for (std::size_t t = 0; t < shape.n_states; ++t)
                    joint[shape.index(s, a, t)] = state_dist[s] * action_dist[a] * state_dist[t];
        return {shape, std::move(joint), std::move(state_dist), std::move(action_dist)};
    }

    /// Uniform over every (s, a, s') triple.
    static CoverageDistribution uniform(TransitionShape shape) {
        return product(std::vector<double>(shape.n_states, 1.0 / double(shape.n_states)),
                       std::vector<double>(shape.n_actions, 1.0 / double(shape.n_actions)));
    }

    /// (s, a) uniform, s' drawn from the MDP dynamics; D_S and D_A uniform.
    static CoverageDistribution uniform_state_action(const TabularMdp& mdp) {
        const auto& shape = mdp.shape();
        const double w = 1.0 / double(shape.n_states * shape.n_actions);
        std::vector<double> joint(shape.size());
        for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = w * mdp.transition()[i];
        return {shape, std::move(joint),
                std::vector<double>(shape.n_states, 1.0 / double(shape.n_states)),
                std::vector<double>(shape.n_actions, 1.0 / double(shape.n_actions))};
    }

    const TransitionShape& shape() const { return shape_; }
    const std::vector<double>& joint() const { return joint_; }
    const std::vector<double>& state_dist() const { return state_; }
    const std::vector<double>& action_dist() const { return action_; }

  private:
    TransitionShape shape_;
    std::vector<double> joint_;
    std::vector<double> state_;
    std::vector<double> action_;
};

/// R -> scale * R + discount * potential(s') - potential(s).
struct EquivalenceTransform {
    double scale = 1.0;
    std::vector<double> potential;
};

inline RewardTable shaping_only(std::span<const double> potential, double discount,
                                TransitionShape shape) {
    if (potential.size() != shape.n_states)
        throw DimensionError("potential length does not match the number of states");
    for (double v : potential)
        if (!std::isfinite(v)) throw ValidationError("potential must be finite");
    RewardTable out(shape);
    for (std::size_t s = 0; s < shape.n_states; ++s)
        for (std::size_t a = 0; a < shape.n_actions; ++a)
            for (std::size_t t = 0; t < shape.n_states; ++t)
                out(s, a, t) = discount * potential[t] - potential[s];
    return out;
}

inline RewardTable apply_equivalence(const RewardTable& reward, const EquivalenceTransform& tf,
                                     double discount) {
    if (!(tf.scale > 0.0)) throw ValidationError("equivalence transform: scale must be > 0");
    if (tf.potential.size() != reward.n_states())
        throw DimensionError("equivalence transform: potential length mismatch");
    for (double v : tf.potential)
        if (!std::isfinite(v)) throw ValidationError("potential must be finite");
    RewardTable out(reward.shape());
    const auto n = reward.n_states();
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t a = 0; a < reward.n_actions(); ++a)
            for (std::size_t t = 0; t < n; ++t)
                out(s, a, t) =
                    tf.scale * reward(s, a, t) + (discount * tf.potential[t] - tf.potential[s]);
    return out;
}

} // namespace epic
