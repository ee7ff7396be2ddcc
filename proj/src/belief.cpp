#include "bml/belief.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bml {

namespace {

constexpr double kBeliefTolerance = 1e-9;
constexpr double kInfoGainAgreement = 1e-10;

Eigen::Index idx(Index k) { return static_cast<Eigen::Index>(k); }

Eigen::VectorXd propagate(const PomdpModel& m, const Eigen::VectorXd& b, Index action) {
    return m.transition[action].transpose() * b;
}

// Weighted mean of rows of `rows` under `weights` (summing to one), taken
// relative to the row of the heaviest weight. Identical rows therefore give
// back that row bit for bit.
Eigen::VectorXd mixture_of_rows(const Eigen::VectorXd& weights, const Eigen::MatrixXd& rows) {
    Eigen::Index ref = 0;
    weights.maxCoeff(&ref);
    Eigen::VectorXd out = rows.row(ref).transpose();
    for (Eigen::Index s = 0; s < weights.size(); ++s) {
        if (s == ref || weights(s) == 0.0) continue;
        out += weights(s) * (rows.row(s) - rows.row(ref)).transpose();
    }
    return out.cwiseMax(0.0);
}

double mixture_of_values(const Eigen::VectorXd& weights, const Eigen::VectorXd& values) {
    Eigen::Index ref = 0;
    weights.maxCoeff(&ref);
    double out = values(ref);
    for (Eigen::Index s = 0; s < weights.size(); ++s) {
        if (s == ref || weights(s) == 0.0) continue;
        out += weights(s) * (values(s) - values(ref));
    }
    return out;
}

Eigen::VectorXd emission_entropies(const PomdpModel& m) {
    Eigen::VectorXd h(m.emission.rows());
    for (Eigen::Index s = 0; s < h.size(); ++s) h(s) = entropy(m.emission.row(s).transpose());
    return h;
}

struct Predictive {
    Eigen::VectorXd prior;      // b'(s'|b,a)
    Eigen::VectorXd obs;        // P(o'|b,a)
    double ambiguity = 0.0;     // E_{b'} H[P(o'|s')]
};

Predictive predictive(const PomdpModel& m, const Belief& b, Index action) {
    Predictive p;
    p.prior = propagate(m, b.probs(), action);
    p.obs = mixture_of_rows(p.prior, m.emission);
    p.ambiguity = mixture_of_values(p.prior, emission_entropies(m));
    return p;
}

double info_gain_from(const Predictive& p) {
    const double ig = entropy(p.obs) - p.ambiguity;
    // Mutual information is nonnegative; only roundoff can push it below 0.
    return ig < 0.0 ? 0.0 : ig;
}

// Unnormalized joint column P(o|s') b'(s') and its mass.
Eigen::VectorXd joint_column(const PomdpModel& m, const Eigen::VectorXd& prior, Index o) {
    return m.emission.col(idx(o)).cwiseProduct(prior);
}

double expected_posterior_entropy(const PomdpModel& m, const Eigen::VectorXd& prior) {
    double acc = 0.0;
    for (Index o = 0; o < m.num_observations; ++o) {
        Eigen::VectorXd joint = joint_column(m, prior, o);
        const double mass = joint.sum();
        if (mass <= 0.0) continue;
        acc += mass * entropy(joint / mass);
    }
    return acc;
}

}  // namespace

Belief::Belief(Eigen::VectorXd probs) : probs_(std::move(probs)) {
    if (probs_.size() == 0) throw std::invalid_argument("belief must be non-empty");
    for (Eigen::Index k = 0; k < probs_.size(); ++k)
        if (!(probs_(k) >= 0.0))
            throw std::invalid_argument("belief entry " + std::to_string(k) + " is negative");
    if (std::abs(probs_.sum() - 1.0) > kBeliefTolerance)
        throw std::invalid_argument("belief does not sum to 1");
}

Belief Belief::uniform(std::size_t n) {
    return Belief(Eigen::VectorXd::Constant(idx(n), 1.0 / static_cast<double>(n)));
}

Belief Belief::delta(std::size_t n, Index k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(idx(n));
    v(idx(k)) = 1.0;
    return Belief(std::move(v));
}

double entropy(const Eigen::VectorXd& p) {
    double h = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k)
        if (p(k) > 0.0) h -= p(k) * std::log(p(k));
    return h;
}

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    double kl = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (p(k) <= 0.0) continue;
        if (q(k) <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p(k) * (std::log(p(k)) - std::log(q(k)));
    }
    return kl;
}

Belief belief_update(const PomdpModel& m, const Belief& b, Index action, Index observation) {
    Eigen::VectorXd joint = joint_column(m, propagate(m, b.probs(), action), observation);
    const double mass = joint.sum();
    if (!(mass > 0.0))
        throw ImpossibleObservation("impossible observation " + std::to_string(observation) +
                                    " after action " + std::to_string(action));
    return Belief(joint / mass);
}

Eigen::VectorXd obs_predictive(const PomdpModel& m, const Belief& b, Index action) {
    return predictive(m, b, action).obs;
}

Belief open_loop_propagate(const PomdpModel& m, const Belief& b, Index action) {
    Eigen::VectorXd next = propagate(m, b.probs(), action);
    return Belief(next / next.sum());
}

double info_gain(const PomdpModel& m, const Belief& b, Index action) {
    return info_gain_from(predictive(m, b, action));
}

double info_gain_expected_kl(const PomdpModel& m, const Belief& b, Index action) {
    const Eigen::VectorXd prior = propagate(m, b.probs(), action);
    double acc = 0.0;
    for (Index o = 0; o < m.num_observations; ++o) {
        Eigen::VectorXd joint = joint_column(m, prior, o);
        const double mass = joint.sum();
        if (mass <= 0.0) continue;
        acc += mass * kl_divergence(joint / mass, prior);
    }
    return acc;
}

RewardBundle reward_bundle(const PomdpModel& m, const Belief& b, Index action,
                           PreferenceConvention convention) {
    const Predictive p = predictive(m, b, action);
    const Eigen::VectorXd log_pref = m.log_preference(convention);

    RewardBundle r;
    r.task = b.probs().dot(m.reward.col(idx(action)));
    r.pragmatic = p.obs.dot(log_pref);
    r.info_gain = info_gain_from(p);

    const double ig_kl = info_gain_expected_kl(m, b, action);
    if (std::abs(ig_kl - r.info_gain) > kInfoGainAgreement)
        throw std::logic_error("information gain forms disagree: " + std::to_string(ig_kl) +
                               " vs " + std::to_string(r.info_gain));

    r.efe = convention == PreferenceConvention::SelfNormalized ? m.lambda * r.task + r.info_gain
                                                               : r.pragmatic + r.info_gain;
    r.active_sensing = -expected_posterior_entropy(m, p.prior);
    r.ambiguity = p.ambiguity;
    r.risk = -entropy(p.obs) - r.pragmatic;
    return r;
}

double belief_reward(const PomdpModel& m, const Belief& b, Index action, const RewardSpec& spec) {
    switch (spec.kind) {
        case RewardKind::Task:
            return b.probs().dot(m.reward.col(idx(action)));
        case RewardKind::Efe: {
            const Predictive p = predictive(m, b, action);
            const double ig = info_gain_from(p);
            if (spec.convention == PreferenceConvention::SelfNormalized)
                return m.lambda * b.probs().dot(m.reward.col(idx(action))) + ig;
            return p.obs.dot(m.log_preference(spec.convention)) + ig;
        }
        case RewardKind::ActiveSensing:
            return -expected_posterior_entropy(m, propagate(m, b.probs(), action));
    }
    throw std::logic_error("unknown reward kind");
}

ConditionalDist posterior_table(const PomdpModel& m, const Belief& b, Index action) {
    const Eigen::VectorXd prior = propagate(m, b.probs(), action);
    ConditionalDist out{Eigen::MatrixXd(idx(m.num_observations), idx(m.num_states))};
    for (Index o = 0; o < m.num_observations; ++o) {
        Eigen::VectorXd joint = joint_column(m, prior, o);
        const double mass = joint.sum();
        if (mass > 0.0)
            out.table.row(idx(o)) = (joint / mass).transpose();
        else
            out.table.row(idx(o)) = prior.transpose();
    }
    return out;
}

double full_efe_step(const PomdpModel& m, const Belief& b, Index action,
                     const ConditionalDist& tilde, PreferenceConvention convention) {
    if (tilde.table.rows() != idx(m.num_observations) || tilde.table.cols() != idx(m.num_states))
        throw std::invalid_argument("conditional table must be O x S");
    const Eigen::VectorXd prior = propagate(m, b.probs(), action);
    const Eigen::VectorXd log_pref = m.log_preference(convention);
    double acc = 0.0;
    for (Index o = 0; o < m.num_observations; ++o) {
        for (Index s = 0; s < m.num_states; ++s) {
            const double joint = prior(idx(s)) * m.emission(idx(s), idx(o));
            if (joint <= 0.0) continue;
            const double t = tilde.table(idx(o), idx(s));
            if (!(t > 0.0))
                throw SupportViolation("preference support violation at (o=" + std::to_string(o) +
                                       ", s=" + std::to_string(s) + ")");
            acc += joint * (std::log(prior(idx(s))) - log_pref(idx(o)) - std::log(t));
        }
    }
    return acc;
}

ConditionalDist aggregate_posterior(const PomdpModel& m, const Belief& b, Index action) {
    const Eigen::VectorXd prior = propagate(m, b.probs(), action);
    const auto S = idx(m.num_states);
    Eigen::VectorXd log_mean = Eigen::VectorXd::Zero(S);
    for (Index o = 0; o < m.num_observations; ++o) {
        Eigen::VectorXd joint = joint_column(m, prior, o);
        const double mass = joint.sum();
        if (mass <= 0.0) continue;
        for (Eigen::Index s = 0; s < S; ++s)
            log_mean(s) += joint(s) > 0.0 ? mass * std::log(joint(s) / mass)
                                          : -std::numeric_limits<double>::infinity();
    }
    Eigen::VectorXd row;
    const double top = log_mean.maxCoeff();
    if (std::isfinite(top)) {
        row = (log_mean.array() - top).exp();
        row /= row.sum();
    } else {
        // No state keeps mass under every observation; the geometric mean is
        // identically zero, so fall back to the observation mixture.
        row = prior / prior.sum();
    }
    ConditionalDist out{Eigen::MatrixXd(idx(m.num_observations), S)};
    for (Index o = 0; o < m.num_observations; ++o) out.table.row(idx(o)) = row.transpose();
    return out;
}

}  // namespace bml
