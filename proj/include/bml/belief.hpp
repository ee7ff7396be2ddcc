#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "bml/model.hpp"

namespace bml {

/// Probability vector over hidden states.
class Belief {
public:
    Belief() = default;
    /// Throws std::invalid_argument unless entries are >= 0 and sum to 1 +- 1e-9.
    explicit Belief(Eigen::VectorXd probs);

    static Belief uniform(std::size_t n);
    static Belief delta(std::size_t n, Index k);

    const Eigen::VectorXd& probs() const noexcept { return probs_; }
    double operator[](Index k) const { return probs_(static_cast<Eigen::Index>(k)); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }

    friend bool operator==(const Belief& a, const Belief& b) { return a.probs_ == b.probs_; }

private:
    Eigen::VectorXd probs_;
};

class ImpossibleObservation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SupportViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shannon entropy in nats, 0 log 0 = 0.
double entropy(const Eigen::VectorXd& p);

/// KL[p || q] in nats. +infinity if p has mass where q has none.
double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// Exact Bayes filter: b'(s') proportional to P(o|s') sum_s P(s'|s,a) b(s).
Belief belief_update(const PomdpModel& m, const Belief& b, Index action, Index observation);

/// P(o'|b,a) = sum_{s,s'} P(o'|s') P(s'|s,a) b(s).
Eigen::VectorXd obs_predictive(const PomdpModel& m, const Belief& b, Index action);

/// Marginal push-forward b'(s') = sum_s P(s'|s,a) b(s).
Belief open_loop_propagate(const PomdpModel& m, const Belief& b, Index action);

/// Information gain as H[P(o'|b,a)] - E_{b'(s')} H[P(o'|s')].
double info_gain(const PomdpModel& m, const Belief& b, Index action);

/// Information gain as E_{P(o'|b,a)} KL[b'(.|o') || b'(.)].
double info_gain_expected_kl(const PomdpModel& m, const Belief& b, Index action);

struct RewardBundle {
    double task = 0.0;            ///< sum_s b(s) R(s,a)
    double pragmatic = 0.0;       ///< E_{P(o'|b,a)} log P~(o')
    double info_gain = 0.0;       ///< IG(b,a)
    double efe = 0.0;             ///< EFE reward in maximization form
    double active_sensing = 0.0;  ///< -E_{P(o'|b,a)} H[b'(.|o')]
    double risk = 0.0;            ///< KL[P(o'|b,a) || P~(o')]
    double ambiguity = 0.0;       ///< E_{b'(s')} H[P(o'|s')]
};

/// All belief-state rewards for (b, a).
///
/// Under SelfNormalized the EFE reward is lambda * task + IG; under
/// Normalized it is pragmatic + IG. IG is computed both as an expected KL
/// and as an entropy difference; the two must agree within 1e-10 and the
/// entropy form is returned.
RewardBundle reward_bundle(const PomdpModel& m, const Belief& b, Index action,
                           PreferenceConvention convention = PreferenceConvention::Normalized);

enum class RewardKind { Task, Efe, ActiveSensing };

struct RewardSpec {
    RewardKind kind = RewardKind::Task;
    // The EFE planners share the task reward as pragmatic value by default.
    PreferenceConvention convention = PreferenceConvention::SelfNormalized;
};

/// The single reward field selected by `spec`, computing only what it needs.
double belief_reward(const PomdpModel& m, const Belief& b, Index action, const RewardSpec& spec);

/// Conditional distribution over states for each observation, table(o, s).
struct ConditionalDist {
    Eigen::MatrixXd table;
};

/// Exact posteriors b'(s'|o', b, a) as rows; rows of zero-probability
/// observations hold the open-loop prior.
ConditionalDist posterior_table(const PomdpModel& m, const Belief& b, Index action);

/// One-step full EFE E_Q[log Q(s') - log P~(o') - log P~(s'|o')].
/// Throws SupportViolation if `tilde` is zero where the joint has mass.
double full_efe_step(const PomdpModel& m, const Belief& b, Index action,
                     const ConditionalDist& tilde,
                     PreferenceConvention convention = PreferenceConvention::Normalized);

/// Observation-averaged geometric mean of the exact posteriors,
/// renormalized, replicated on every row.
ConditionalDist aggregate_posterior(const PomdpModel& m, const Belief& b, Index action);

}  // namespace bml
