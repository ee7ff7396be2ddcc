#include "bml/sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "bml/parallel.hpp"

namespace bml {

namespace {

Eigen::Index idx(Index k) { return static_cast<Eigen::Index>(k); }

double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Inverse-CDF draw; mass lost to roundoff falls on the last positive entry.
template <typename Row>
Index sample(const Row& probs, std::mt19937_64& rng) {
    const double u = unit_draw(rng);
    double acc = 0.0;
    Index last = 0;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
        if (probs(k) <= 0.0) continue;
        last = static_cast<Index>(k);
        acc += probs(k);
        if (u < acc) return last;
    }
    return last;
}

double pairwise(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += v[k];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise(v, half) + pairwise(v + half, n - half);
}

}  // namespace

double pairwise_sum(const std::vector<double>& values) {
    return pairwise(values.data(), values.size());
}

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(episode),
                      static_cast<std::uint32_t>(episode >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Trajectory rollout(const PomdpModel& m, const BeliefPolicy& policy, std::size_t horizon,
                   std::uint64_t seed) {
    if (horizon < 1) throw std::invalid_argument("rollout horizon must be at least 1");
    std::mt19937_64 rng(seed);
    Trajectory tr;
    tr.states.reserve(horizon);
    tr.actions.reserve(horizon);
    tr.observations.reserve(horizon);
    tr.beliefs.reserve(horizon + 1);

    Index s = sample(m.initial_belief, rng);
    tr.beliefs.emplace_back(m.initial_belief);
    double weight = 1.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const Index a = policy(tr.beliefs.back());
        if (a >= m.num_actions) throw std::out_of_range("policy returned an invalid action");
        tr.states.push_back(s);
        tr.actions.push_back(a);
        tr.discounted_return += weight * m.reward(idx(s), idx(a));
        weight *= m.discount;
        s = sample(m.transition[a].row(idx(s)), rng);
        const Index o = sample(m.emission.row(idx(s)), rng);
        tr.observations.push_back(o);
        tr.beliefs.push_back(belief_update(m, tr.beliefs.back(), a, o));
    }
    return tr;
}

ReturnEstimate estimate_return(const PomdpModel& m, const BeliefPolicy& policy,
                               std::size_t episodes, std::size_t horizon, std::uint64_t seed) {
    if (episodes < 2) throw std::invalid_argument("need at least two episodes");
    if (horizon < 1) throw std::invalid_argument("rollout horizon must be at least 1");
    ReturnEstimate est;
    est.episodes = episodes;
    est.horizon = horizon;
    est.truncation_bound =
        std::pow(m.discount, static_cast<double>(horizon)) * m.r_max() / (1.0 - m.discount);
    est.returns.assign(episodes, 0.0);
    parallel_for(episodes, [&](std::size_t k) {
        est.returns[k] = rollout(m, policy, horizon, episode_seed(seed, k)).discounted_return;
    });

    const double n = static_cast<double>(episodes);
    est.mean = pairwise_sum(est.returns) / n;
    std::vector<double> sq(episodes);
    for (std::size_t k = 0; k < episodes; ++k) {
        const double d = est.returns[k] - est.mean;
        sq[k] = d * d;
    }
    est.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
    return est;
}

BeliefPolicy grid_policy(const BeliefGrid& g, std::vector<Index> policy) {
    if (policy.size() != g.size()) throw std::invalid_argument("policy does not cover the grid");
    return [&g, policy = std::move(policy)](const Belief& b) { return policy[g.snap(b)]; };
}

}  // namespace bml
