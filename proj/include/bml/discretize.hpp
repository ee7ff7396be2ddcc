#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bml/belief.hpp"
#include "bml/model.hpp"

namespace bml {

/// The simplex lattice {k/m : k in N^S, sum k = m}, in lexicographic order
/// of the integer compositions k.
class BeliefGrid {
public:
    /// Throws std::invalid_argument if S or m is zero, std::length_error if
    /// the grid would exceed 10^7 points.
    BeliefGrid(std::size_t num_states, std::size_t resolution);

    std::size_t size() const noexcept { return points_.size(); }
    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t resolution() const noexcept { return resolution_; }

    const Belief& point(Index i) const { return points_.at(i); }
    const std::vector<Belief>& points() const noexcept { return points_; }
    std::span<const int> composition(Index i) const;

    /// Rank of a composition of m into S parts.
    Index index_of(std::span<const int> composition) const;

    /// Index of an L1-nearest grid point; ties go to the lowest index.
    Index snap(const Belief& b) const;

    /// L1 distance from b to point i.
    double l1_distance(const Belief& b, Index i) const;

private:
    // Number of compositions of n into p parts.
    std::size_t count(std::size_t n, std::size_t p) const;

    std::size_t num_states_;
    std::size_t resolution_;
    std::vector<std::vector<std::size_t>> counts_;
    std::vector<int> compositions_;
    std::vector<Belief> points_;
};

BeliefGrid build_grid(std::size_t num_states, std::size_t resolution);
Index snap(const BeliefGrid& g, const Belief& b);

/// Binomial coefficient, saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

enum class Dynamics { Closed, Open };

std::string to_string(Dynamics d);
std::string to_string(RewardKind k);

struct Transition {
    Index next = 0;
    double prob = 0.0;
};

struct Provenance {
    Dynamics dynamics = Dynamics::Closed;
    RewardKind reward_kind = RewardKind::Task;
    PreferenceConvention convention = PreferenceConvention::SelfNormalized;
    double lambda = 1.0;
    std::string model_name;
    std::size_t resolution = 0;
};

/// A finite discounted MDP with sparse transition lists.
struct FiniteMdp {
    std::size_t n = 0;
    std::size_t num_actions = 0;
    std::vector<std::vector<Transition>> trans;  ///< indexed by i * A + a
    Eigen::MatrixXd rew;                         ///< (i, a)
    Eigen::VectorXd mu;
    double discount = 0.9;
    Provenance provenance;

    const std::vector<Transition>& successors(Index i, Index a) const {
        return trans[i * num_actions + a];
    }
    std::vector<Transition>& successors(Index i, Index a) { return trans[i * num_actions + a]; }

    /// Dense P(.|i,a).
    Eigen::VectorXd row(Index i, Index a) const;
};

/// Checks stochasticity and shapes; throws std::invalid_argument.
void check_finite_mdp(const FiniteMdp& M);

/// Compiles the closed-loop (observation-branching) or open-loop
/// (deterministic push-forward) belief MDP on the grid. Rewards are
/// evaluated at the exact grid points; successors are snapped.
FiniteMdp compile_belief_mdp(const PomdpModel& m, const BeliefGrid& g, Dynamics dynamics,
                             const RewardSpec& reward);

/// The fully observed MDP (R(s,a), P(s'|s,a), mu) underlying a POMDP.
FiniteMdp underlying_mdp(const PomdpModel& m);

}  // namespace bml
