#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bml/belief.hpp"
#include "bml/discretize.hpp"
#include "bml/model.hpp"

namespace bml {

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Solution {
    Eigen::VectorXd V;
    Eigen::MatrixXd Q;
    std::vector<Index> policy;
    double residual = 0.0;  ///< sup-norm change of the last sweep
    std::size_t iterations = 0;
};

/// R + gamma * P V, one row per state.
Eigen::MatrixXd q_values(const FiniteMdp& M, const Eigen::VectorXd& V);

/// Row-wise argmax with lowest-index tie-break.
std::vector<Index> greedy(const Eigen::MatrixXd& Q);

/// Value iteration from V = 0, stopping once a sweep changes V by at most
/// eps (1 - gamma) / (2 gamma); V is then within eps of the fixed point.
Solution value_iteration(const FiniteMdp& M, double eps = 1e-9);

/// Q_QMDP(b, a) = sum_s b(s) Q_MDP(s, a) for the fully observed MDP.
class Qmdp {
public:
    explicit Qmdp(Eigen::MatrixXd q_mdp) : q_mdp_(std::move(q_mdp)) {}

    double q(const Belief& b, Index a) const;
    double value(const Belief& b) const;
    Index action(const Belief& b) const;
    const Eigen::MatrixXd& table() const noexcept { return q_mdp_; }

private:
    Eigen::MatrixXd q_mdp_;
};

Qmdp qmdp(const PomdpModel& m, double eps = 1e-10);

/// Exact H-step optimal value by recursion over the belief tree, memoized on
/// (belief, steps to go). Throws BudgetExceeded past 10^7 node expansions.
double tree_value(const PomdpModel& m, const Belief& b, std::size_t horizon, Dynamics dynamics,
                  const RewardSpec& reward);

struct PlanResult {
    std::vector<Index> best_sequence;
    double best_value = 0.0;
    std::optional<std::vector<double>> per_sequence_values;  ///< lexicographic order
    double policy_value = 0.0;
    bool agree = false;
};

/// Scores every open-loop action sequence of length T under the belief
/// push-forward, and compares the best with backward induction.
/// Throws BudgetExceeded if A^T > 10^6.
PlanResult enumerate_plans(const PomdpModel& m, const Belief& b0, std::size_t horizon,
                           const RewardSpec& reward = {RewardKind::Efe,
                                                       PreferenceConvention::SelfNormalized},
                           bool keep_table = false);

}  // namespace bml
