#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bml/belief.hpp"
#include "bml/discretize.hpp"
#include "bml/model.hpp"

namespace bml {

using BeliefPolicy = std::function<Index(const Belief&)>;

struct Trajectory {
    std::vector<Index> states;
    std::vector<Index> actions;
    std::vector<Index> observations;
    std::vector<Belief> beliefs;  ///< T + 1 entries, beliefs[0] = initial belief
    double discounted_return = 0.0;
};

/// One closed-loop episode of T steps in the true POMDP. Fully determined
/// by `seed`.
Trajectory rollout(const PomdpModel& m, const BeliefPolicy& policy, std::size_t horizon,
                   std::uint64_t seed);

/// Seed of episode k in a run seeded with `seed`.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode);

struct ReturnEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t episodes = 0;
    std::size_t horizon = 0;
    double truncation_bound = 0.0;  ///< gamma^T R_max / (1 - gamma)
    std::vector<double> returns;
};

/// Mean and standard error of the discounted return over independent
/// episodes. Throws std::invalid_argument if episodes < 2 or horizon < 1.
ReturnEstimate estimate_return(const PomdpModel& m, const BeliefPolicy& policy,
                               std::size_t episodes, std::size_t horizon, std::uint64_t seed);

/// Acts with policy[snap(b)]; the grid must outlive the returned policy.
BeliefPolicy grid_policy(const BeliefGrid& g, std::vector<Index> policy);

/// Sum with pairwise splitting.
double pairwise_sum(const std::vector<double>& values);

}  // namespace bml
