#include "bml/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bml/parallel.hpp"

namespace bml {

namespace {

constexpr std::size_t kMaxGridPoints = 10'000'000;
constexpr double kRowTolerance = 1e-9;

Eigen::Index idx(Index k) { return static_cast<Eigen::Index>(k); }

void enumerate(std::size_t parts, int remaining, std::vector<int>& prefix, std::vector<int>& out) {
    if (prefix.size() + 1 == parts) {
        prefix.push_back(remaining);
        out.insert(out.end(), prefix.begin(), prefix.end());
        prefix.pop_back();
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        prefix.push_back(k);
        enumerate(parts, remaining - k, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::size_t result = 1;
    for (std::size_t j = 1; j <= k; ++j) {
        // result * (n - k + j) / j is exact at every step.
        const std::size_t factor = n - k + j;
        const std::size_t g = std::gcd(result, j);
        const std::size_t r = result / g;
        const std::size_t f = factor / (j / g);
        if (r != 0 && f > std::numeric_limits<std::size_t>::max() / r)
            return std::numeric_limits<std::size_t>::max();
        result = r * f;
    }
    return result;
}

BeliefGrid::BeliefGrid(std::size_t num_states, std::size_t resolution)
    : num_states_(num_states), resolution_(resolution) {
    if (num_states == 0) throw std::invalid_argument("grid needs at least one state");
    if (resolution == 0) throw std::invalid_argument("grid resolution must be positive");
    const std::size_t total = binomial(resolution + num_states - 1, num_states - 1);
    if (total > kMaxGridPoints)
        throw std::length_error("grid of " + std::to_string(total) + " points exceeds the limit of " +
                                std::to_string(kMaxGridPoints));

    counts_.assign(num_states + 1, std::vector<std::size_t>(resolution + 1, 0));
    counts_[0][0] = 1;
    for (std::size_t p = 1; p <= num_states; ++p)
        for (std::size_t n = 0; n <= resolution; ++n)
            counts_[p][n] = binomial(n + p - 1, p - 1);

    compositions_.reserve(total * num_states);
    std::vector<int> prefix;
    enumerate(num_states, static_cast<int>(resolution), prefix, compositions_);

    points_.reserve(total);
    const double m = static_cast<double>(resolution);
    for (std::size_t i = 0; i < total; ++i) {
        Eigen::VectorXd v(idx(num_states));
        for (std::size_t s = 0; s < num_states; ++s)
            v(idx(s)) = compositions_[i * num_states + s] / m;
        points_.emplace_back(std::move(v));
    }
}

std::size_t BeliefGrid::count(std::size_t n, std::size_t p) const { return counts_[p][n]; }

std::span<const int> BeliefGrid::composition(Index i) const {
    if (i >= size()) throw std::out_of_range("grid index out of range");
    return {compositions_.data() + i * num_states_, num_states_};
}

Index BeliefGrid::index_of(std::span<const int> k) const {
    if (k.size() != num_states_) throw std::invalid_argument("composition has wrong length");
    long long total = 0;
    for (int v : k) {
        if (v < 0) throw std::invalid_argument("composition has a negative part");
        total += v;
    }
    if (total != static_cast<long long>(resolution_))
        throw std::invalid_argument("composition does not sum to the resolution");

    Index rank = 0;
    std::size_t remaining = resolution_;
    for (std::size_t i = 0; i + 1 < num_states_; ++i) {
        const std::size_t tail = num_states_ - 1 - i;
        for (int v = 0; v < k[i]; ++v) rank += count(remaining - static_cast<std::size_t>(v), tail);
        remaining -= static_cast<std::size_t>(k[i]);
    }
    return rank;
}

Index BeliefGrid::snap(const Belief& b) const {
    if (b.size() != num_states_) throw std::invalid_argument("belief dimension does not match grid");
    const double m = static_cast<double>(resolution_);
    const std::size_t S = num_states_;
    std::vector<int> k(S);
    std::vector<double> frac(S);
    long long assigned = 0;
    for (std::size_t s = 0; s < S; ++s) {
        const double x = b[s] * m;
        const double fl = std::floor(x);
        k[s] = static_cast<int>(fl);
        frac[s] = x - fl;
        assigned += k[s];
    }
    long long short_by = static_cast<long long>(resolution_) - assigned;

    // Largest remainder. Among equal fractions the later coordinate is raised,
    // which yields the lexicographically smallest composition.
    std::vector<std::size_t> order(S);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
        if (frac[a] != frac[c]) return frac[a] > frac[c];
        return a > c;
    });
    for (std::size_t j = 0; short_by > 0; j = (j + 1) % S, --short_by) ++k[order[j]];
    // Only roundoff on an over-full belief can get here.
    for (std::size_t j = S; short_by < 0 && j > 0; --j) {
        const std::size_t s = order[j - 1];
        if (k[s] > 0) {
            --k[s];
            ++short_by;
        }
    }
    return index_of(k);
}

double BeliefGrid::l1_distance(const Belief& b, Index i) const {
    return (b.probs() - point(i).probs()).cwiseAbs().sum();
}

BeliefGrid build_grid(std::size_t num_states, std::size_t resolution) {
    return BeliefGrid(num_states, resolution);
}

Index snap(const BeliefGrid& g, const Belief& b) { return g.snap(b); }

std::string to_string(Dynamics d) { return d == Dynamics::Closed ? "closed" : "open"; }

std::string to_string(RewardKind k) {
    switch (k) {
        case RewardKind::Task: return "task";
        case RewardKind::Efe: return "efe";
        case RewardKind::ActiveSensing: return "active_sensing";
    }
    return "unknown";
}

Eigen::VectorXd FiniteMdp::row(Index i, Index a) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(idx(n));
    for (const auto& t : successors(i, a)) out(idx(t.next)) += t.prob;
    return out;
}

void check_finite_mdp(const FiniteMdp& M) {
    if (M.n == 0 || M.num_actions == 0) throw std::invalid_argument("empty MDP");
    if (M.trans.size() != M.n * M.num_actions)
        throw std::invalid_argument("transition table has wrong size");
    if (M.rew.rows() != idx(M.n) || M.rew.cols() != idx(M.num_actions))
        throw std::invalid_argument("reward matrix has wrong shape");
    if (M.mu.size() != idx(M.n)) throw std::invalid_argument("initial distribution has wrong size");
    if (!(M.discount > 0.0 && M.discount < 1.0)) throw std::invalid_argument("discount not in (0,1)");
    if ((M.mu.array() < 0.0).any() || std::abs(M.mu.sum() - 1.0) > kRowTolerance)
        throw std::invalid_argument("initial distribution is not a distribution");
    for (Index i = 0; i < M.n; ++i) {
        for (Index a = 0; a < M.num_actions; ++a) {
            double total = 0.0;
            for (const auto& t : M.successors(i, a)) {
                if (t.next >= M.n || t.prob < 0.0)
                    throw std::invalid_argument("bad transition at (" + std::to_string(i) + "," +
                                                std::to_string(a) + ")");
                total += t.prob;
            }
            if (std::abs(total - 1.0) > kRowTolerance)
                throw std::invalid_argument("transition row (" + std::to_string(i) + "," +
                                            std::to_string(a) + ") sums to " +
                                            std::to_string(total));
        }
    }
}

FiniteMdp compile_belief_mdp(const PomdpModel& m, const BeliefGrid& g, Dynamics dynamics,
                             const RewardSpec& reward) {
    if (g.num_states() != m.num_states)
        throw std::invalid_argument("grid dimension " + std::to_string(g.num_states()) +
                                    " does not match model with " + std::to_string(m.num_states) +
                                    " states");
    FiniteMdp M;
    M.n = g.size();
    M.num_actions = m.num_actions;
    M.trans.assign(M.n * M.num_actions, {});
    M.rew = Eigen::MatrixXd::Zero(idx(M.n), idx(M.num_actions));
    M.discount = m.discount;
    M.provenance = {dynamics, reward.kind, reward.convention, m.lambda, m.name, g.resolution()};

    parallel_for(M.n, [&](std::size_t i) {
        const Belief& b = g.point(i);
        for (Index a = 0; a < m.num_actions; ++a) {
            M.rew(idx(i), idx(a)) = belief_reward(m, b, a, reward);
            auto& out = M.successors(i, a);
            if (dynamics == Dynamics::Open) {
                out.push_back({g.snap(open_loop_propagate(m, b, a)), 1.0});
                continue;
            }
            const Eigen::VectorXd prior = m.transition[a].transpose() * b.probs();
            std::map<Index, double> merged;
            for (Index o = 0; o < m.num_observations; ++o) {
                const Eigen::VectorXd joint = m.emission.col(idx(o)).cwiseProduct(prior);
                const double mass = joint.sum();
                if (!(mass > 0.0)) continue;
                merged[g.snap(Belief(joint / mass))] += mass;
            }
            for (const auto& [next, prob] : merged) out.push_back({next, prob});
        }
    });

    M.mu = Eigen::VectorXd::Zero(idx(M.n));
    M.mu(idx(g.snap(Belief(m.initial_belief)))) = 1.0;
    return M;
}

FiniteMdp underlying_mdp(const PomdpModel& m) {
    FiniteMdp M;
    M.n = m.num_states;
    M.num_actions = m.num_actions;
    M.trans.assign(M.n * M.num_actions, {});
    M.rew = m.reward;
    M.mu = m.initial_belief;
    M.discount = m.discount;
    M.provenance.model_name = m.name;
    for (Index s = 0; s < M.n; ++s)
        for (Index a = 0; a < M.num_actions; ++a)
            for (Index t = 0; t < M.n; ++t) {
                const double p = m.transition[a](idx(s), idx(t));
                if (p > 0.0) M.successors(s, a).push_back({t, p});
            }
    return M;
}

}  // namespace bml
