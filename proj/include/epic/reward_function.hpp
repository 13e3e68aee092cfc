#pragma once

// Black-box reward functions over batches of (possibly continuous) transitions.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>

#include "epic/core.hpp"

namespace epic {

using Rng = std::mt19937_64;

/// Independent RNG stream `stream` derived from `seed`.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32), 0x5eedu};
    return Rng(seq);
}

/// One transition per row.
struct TransitionBatch {
    Eigen::MatrixXd states;
    Eigen::MatrixXd actions;
    Eigen::MatrixXd next_states;

    Eigen::Index size() const { return states.rows(); }
};

/// Samples from D_S x D_A used to estimate the canonicalization expectations.
/// `states` are draws of the next-state variable, `actions` of the action.
struct StateActionBatch {
    Eigen::MatrixXd actions;
    Eigen::MatrixXd states;

    Eigen::Index size() const { return states.rows(); }
};

class RewardFunction {
  public:
    using Evaluator = std::function<Eigen::VectorXd(const TransitionBatch&)>;

    RewardFunction(Eigen::Index state_dim, Eigen::Index action_dim, Evaluator fn,
                   std::string name = {})
        : state_dim_(state_dim), action_dim_(action_dim), fn_(std::move(fn)),
          name_(std::move(name)) {}

    Eigen::Index state_dim() const { return state_dim_; }
    Eigen::Index action_dim() const { return action_dim_; }
    const std::string& name() const { return name_; }

    /// Evaluates a batch; non-finite outputs raise an error naming the row.
    Eigen::VectorXd operator()(const TransitionBatch& batch) const {
        if (batch.states.cols() != state_dim_ || batch.next_states.cols() != state_dim_ ||
            batch.actions.cols() != action_dim_)
            throw DimensionError("reward '" + name_ + "': batch dimensionality mismatch");
        Eigen::VectorXd out = fn_(batch);
        if (out.size() != batch.size())
            throw DimensionError("reward '" + name_ + "': evaluator returned wrong length");
        for (Eigen::Index i = 0; i < out.size(); ++i)
            if (!std::isfinite(out(i)))
                throw ValidationError("reward '" + name_ + "': non-finite value at batch index " +
                                      std::to_string(i));
        return out;
    }

  private:
    Eigen::Index state_dim_;
    Eigen::Index action_dim_;
    Evaluator fn_;
    std::string name_;
};

namespace detail {

inline std::size_t decode_one_hot(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    Eigen::Index idx = 0;
    row.maxCoeff(&idx);
    return std::size_t(idx);
}

} // namespace detail

/// One-hot encoding of a tabular index.
inline Eigen::RowVectorXd one_hot(std::size_t index, std::size_t size) {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(Eigen::Index(size));
    v(Eigen::Index(index)) = 1.0;
    return v;
}

/// Wraps a reward table as a black box over one-hot encoded states and actions.
inline RewardFunction tabular_reward_function(RewardTable table, std::string name = {}) {
    const auto ns = Eigen::Index(table.n_states());
    const auto na = Eigen::Index(table.n_actions());
    return RewardFunction(
        ns, na,
        [table = std::move(table)](const TransitionBatch& batch) {
            Eigen::VectorXd out(batch.size());
            for (Eigen::Index i = 0; i < batch.size(); ++i)
                out(i) = table(detail::decode_one_hot(batch.states.row(i)),
                               detail::decode_one_hot(batch.actions.row(i)),
                               detail::decode_one_hot(batch.next_states.row(i)));
            return out;
        },
        std::move(name));
}

} // namespace epic
