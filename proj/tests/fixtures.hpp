#pragma once

// Shared constructions for the ERC pathology: two equiprobable initial states
// X and Y, one action, and one-step episodes into terminal states T1 or T2.

#include <Eigen/Dense>

#include <vector>

#include "epic/core.hpp"
#include "epic/sampling.hpp"

namespace fixtures {

inline constexpr std::size_t kX = 0, kY = 1, kT1 = 2, kT2 = 3;

inline epic::TransitionShape erc_toy_shape() { return {4, 1}; }

/// Base reward on the four episodes (X,T1), (X,T2), (Y,T1), (Y,T2).
inline epic::RewardTable erc_toy_reward(double xt1, double xt2, double yt1, double yt2) {
    epic::RewardTable r(erc_toy_shape());
    r(kX, 0, kT1) = xt1;
    r(kX, 0, kT2) = xt2;
    r(kY, 0, kT1) = yt1;
    r(kY, 0, kT2) = yt2;
    return r;
}

/// Potential equal to c on X and 0 elsewhere.
inline std::vector<double> erc_toy_potential(double c) { return {c, 0.0, 0.0, 0.0}; }

/// Each of the four episodes exactly once.
inline std::vector<epic::Trajectory> erc_toy_episodes() {
    std::vector<epic::Trajectory> out;
    for (auto s : {kX, kY})
        for (auto t : {kT1, kT2}) {
            epic::Trajectory tr{Eigen::MatrixXd::Zero(2, 4), Eigen::MatrixXd::Ones(1, 1)};
            tr.states(0, Eigen::Index(s)) = 1.0;
            tr.states(1, Eigen::Index(t)) = 1.0;
            out.push_back(tr);
        }
    return out;
}

} // namespace fixtures
