#pragma once

#include <cstdint>

#include "bml/discretize.hpp"
#include "bml/model.hpp"

namespace bml::fixtures {

/// Two-door tiger problem with state-only emissions.
///
/// States: 0 = tiger-left, 1 = tiger-right. Actions: 0 = listen,
/// 1 = open-left, 2 = open-right. Observations: 0 = hear-left,
/// 1 = hear-right, correct with probability 0.85. Opening a door resets the
/// tiger uniformly. Rewards -1 / +10 / -100, discount 0.95.
PomdpModel tiger();

/// Tiger with P(o|s) uniform: observations carry no information.
PomdpModel tiger_uniform_emission();

/// Tiger with P(o|s) = identity: the state is fully observed.
PomdpModel tiger_identity_emission();

struct RandomModelSpec {
    std::size_t num_states = 3;
    std::size_t num_actions = 2;
    std::size_t num_observations = 2;
    double discount = 0.9;
    std::uint64_t seed = 0;
};

/// Dirichlet(1) transition and emission rows, uniform(-1, 1) rewards and
/// logits, Dirichlet(1) initial belief.
PomdpModel random_model(const RandomModelSpec& spec);

/// Replaces every emission row with the uniform distribution.
PomdpModel with_uniform_emission(PomdpModel m);

/// Replaces the emission with the identity (O becomes S).
PomdpModel with_identity_emission(PomdpModel m);

/// Dirichlet(1) sample of the given dimension.
Eigen::VectorXd dirichlet(std::size_t n, std::uint64_t seed);

/// Random finite MDP: Dirichlet(1) rows, uniform(-1, 1) rewards, Dirichlet
/// initial distribution.
FiniteMdp random_finite_mdp(std::size_t n, std::size_t num_actions, double discount,
                            std::uint64_t seed);

enum class Mismatch { RewardOnly, DynamicsOnly, Both };

/// Perturbed copy of `base` sharing n, A, mu and discount. `strength` in
/// [0, 1] mixes each perturbed row with a fresh Dirichlet row.
FiniteMdp perturbed_finite_mdp(const FiniteMdp& base, Mismatch kind, double strength,
                               std::uint64_t seed);

}  // namespace bml::fixtures
