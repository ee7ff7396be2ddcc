#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bml/belief.hpp"
#include "bml/discretize.hpp"
#include "bml/model.hpp"
#include "bml/planners.hpp"

namespace bml {

using Policy = std::vector<Index>;

/// Normalized discounted state-action occupancy, d(i, a).
struct Occupancy {
    Eigen::MatrixXd d;

    Eigen::VectorXd state_marginal() const { return d.rowwise().sum(); }
};

/// Solves rho = mu + gamma P_pi^T rho exactly and spreads (1 - gamma) rho
/// onto the chosen actions.
Occupancy occupancy(const FiniteMdp& M, const Policy& policy);

struct PolicyValue {
    Eigen::VectorXd V;
    Eigen::MatrixXd Q;
    double J = 0.0;  ///< mu . V

    Eigen::MatrixXd advantage() const { return Q.colwise() - V; }
};

/// Exact evaluation of a stationary deterministic policy.
PolicyValue evaluate_policy(const FiniteMdp& M, const Policy& policy);

struct GapReport {
    double direct_gap = 0.0;
    double policy_advantage_term = 0.0;
    double reward_model_advantage_term = 0.0;
    double reward_model_disadvantage_term = 0.0;
    double identity_residual = 0.0;
};

struct BoundReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    std::map<std::string, double> components;
    bool holds = false;  ///< lhs <= rhs + 1e-9
    double slack = 0.0;  ///< rhs - lhs
    std::string notes;
    bool informational = false;  ///< never fails a run
};

BoundReport make_report(std::string name, double lhs, double rhs, std::string notes = {},
                        bool informational = false);

/// Three-term decomposition of J_M(pi) - J_M(pi') for pi' optimal in M'.
/// Throws std::invalid_argument unless M and M' share n, A, mu and gamma.
GapReport pdl_decompose(const FiniteMdp& M, const FiniteMdp& Mp, const Policy& pi,
                        const Policy& pip);

/// Density ratio max of d_other / d_expert over cells where the expert
/// occupancy exceeds the threshold, and the other policy's mass outside.
struct DensityRatio {
    double C = 0.0;
    double mismatch_mass = 0.0;
    std::size_t mismatch_cells = 0;
};

DensityRatio density_ratio(const Occupancy& expert, const Occupancy& other,
                           double threshold = 1e-12);

/// Performance-gap upper bound in mismatched MDPs. When pi' puts mass where
/// pi has none the ratio is unbounded: rhs is +infinity and the report
/// says so.
BoundReport pdl_bound(const FiniteMdp& M, const FiniteMdp& Mp, const Policy& pi, const Policy& pip);

/// For every (s, a): |E_P V - E_P' V| <= R_max / (1 - gamma) sqrt(2 KL[P || P']),
/// V the value of `policy` under (R, P). Reports the worst cell.
BoundReport model_advantage_check(const FiniteMdp& M, const FiniteMdp& Mp, const Policy& policy);

struct EvpoResult {
    double ev = 0.0;
    double ev_po = 0.0;
    double evpo = 0.0;
    double expected_kl = 0.0;  ///< E_{P(o)} KL[b(.|o) || b]
};

/// Single-stage value of observing the current state through the emission
/// before acting. reward selects Task or Efe (lambda * task + IG).
EvpoResult evpo(const PomdpModel& m, const Belief& b, RewardKind kind);

/// 4 R_max / ((1 - gamma)^2 m).
double grid_slack(const PomdpModel& m, const BeliefGrid& g);

/// The three grid MDPs behind the open-loop / EFE / Bayes comparison.
struct GridSolutions {
    FiniteMdp closed_task;
    FiniteMdp open_task;
    FiniteMdp open_efe;
    Solution bayes;
    Solution open;
    Solution efe;
    double epsilon = 0.0;
};

GridSolutions solve_grid(const PomdpModel& m, const BeliefGrid& g, double eps = 1e-9);

/// Concavity of the EFE reward along random chords.
BoundReport concavity_check(const PomdpModel& m, std::size_t trials, std::uint64_t seed);

/// V(i) >= V_open(i) - slack at every grid point.
BoundReport closed_dominates_open(const PomdpModel& m, const BeliefGrid& g,
                                  const GridSolutions& sol);

/// Closed-loop model advantage of V against the open successor, for every
/// (i, a): lower and upper reports.
std::vector<BoundReport> closed_loop_advantage(const PomdpModel& m, const BeliefGrid& g,
                                               const FiniteMdp& closed, const FiniteMdp& open,
                                               const Eigen::VectorXd& V, double r_max,
                                               double slack, const std::string& prefix);

std::vector<BoundReport> bound_checks(const PomdpModel& m, const BeliefGrid& g, std::size_t trials,
                                      std::uint64_t seed);

std::vector<BoundReport> assumption_checks(const PomdpModel& m, const BeliefGrid& g,
                                           std::size_t episodes, std::size_t horizon,
                                           std::uint64_t seed);
std::vector<BoundReport> assumption_checks(const PomdpModel& m, const BeliefGrid& g,
                                           const GridSolutions& sol, std::size_t episodes,
                                           std::size_t horizon, std::uint64_t seed);

/// Both open-loop and EFE performance-gap bounds, the algebraic difference of
/// their right-hand sides, and J(EFE) against J(open).
std::vector<BoundReport> theorem1_check(const PomdpModel& m, const BeliefGrid& g,
                                        double eps = 1e-9);
std::vector<BoundReport> theorem1_check(const PomdpModel& m, const BeliefGrid& g,
                                        const GridSolutions& sol);

}  // namespace bml
