#include "bml/planners.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "bml/parallel.hpp"

namespace bml {

namespace {

constexpr std::size_t kTreeBudget = 10'000'000;
constexpr std::size_t kPlanBudget = 1'000'000;
constexpr double kAgreeTolerance = 1e-9;
// Below this many states a sweep is cheaper than starting threads.
constexpr std::size_t kParallelSweep = 4096;

Eigen::Index idx(Index k) { return static_cast<Eigen::Index>(k); }

class TreeOracle {
public:
    TreeOracle(const PomdpModel& m, Dynamics dynamics, const RewardSpec& reward)
        : m_(m), dynamics_(dynamics), reward_(reward) {}

    double value(const Belief& b, std::size_t steps) {
        if (steps == 0) return 0.0;
        Key key{steps, std::vector<double>(b.probs().data(), b.probs().data() + b.size())};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (++expansions_ > kTreeBudget)
            throw BudgetExceeded("tree oracle exceeded " + std::to_string(kTreeBudget) +
                                 " expansions");

        double best = -std::numeric_limits<double>::infinity();
        for (Index a = 0; a < m_.num_actions; ++a) {
            double v = belief_reward(m_, b, a, reward_);
            if (steps > 1) v += m_.discount * future(b, a, steps - 1);
            if (v > best) best = v;
        }
        memo_.emplace(std::move(key), best);
        return best;
    }

private:
    using Key = std::pair<std::size_t, std::vector<double>>;

    double future(const Belief& b, Index a, std::size_t steps) {
        if (dynamics_ == Dynamics::Open) return value(open_loop_propagate(m_, b, a), steps);
        const Eigen::VectorXd prior = m_.transition[a].transpose() * b.probs();
        double acc = 0.0;
        for (Index o = 0; o < m_.num_observations; ++o) {
            const Eigen::VectorXd joint = m_.emission.col(idx(o)).cwiseProduct(prior);
            const double mass = joint.sum();
            if (!(mass > 0.0)) continue;
            acc += mass * value(Belief(joint / mass), steps);
        }
        return acc;
    }

    const PomdpModel& m_;
    Dynamics dynamics_;
    RewardSpec reward_;
    std::map<Key, double> memo_;
    std::size_t expansions_ = 0;
};

}  // namespace

Eigen::MatrixXd q_values(const FiniteMdp& M, const Eigen::VectorXd& V) {
    Eigen::MatrixXd Q(idx(M.n), idx(M.num_actions));
    auto fill = [&](std::size_t i) {
        for (Index a = 0; a < M.num_actions; ++a) {
            double ev = 0.0;
            for (const auto& t : M.successors(i, a)) ev += t.prob * V(idx(t.next));
            Q(idx(i), idx(a)) = M.rew(idx(i), idx(a)) + M.discount * ev;
        }
    };
    if (M.n >= kParallelSweep)
        parallel_for(M.n, fill);
    else
        for (std::size_t i = 0; i < M.n; ++i) fill(i);
    return Q;
}

std::vector<Index> greedy(const Eigen::MatrixXd& Q) {
    std::vector<Index> policy(static_cast<std::size_t>(Q.rows()), 0);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        Index best = 0;
        for (Eigen::Index a = 1; a < Q.cols(); ++a)
            if (Q(i, a) > Q(i, idx(best))) best = static_cast<Index>(a);
        policy[static_cast<std::size_t>(i)] = best;
    }
    return policy;
}

Solution value_iteration(const FiniteMdp& M, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("value iteration tolerance must be positive");
    const double stop = eps * (1.0 - M.discount) / (2.0 * M.discount);
    Solution sol;
    Eigen::VectorXd V = Eigen::VectorXd::Zero(idx(M.n));
    for (;;) {
        const Eigen::VectorXd next = q_values(M, V).rowwise().maxCoeff();
        ++sol.iterations;
        sol.residual = (next - V).cwiseAbs().maxCoeff();
        V = next;
        if (sol.residual <= stop) break;
    }
    // One more backup so that V = max_a Q holds exactly for the returned pair.
    sol.Q = q_values(M, V);
    sol.policy = greedy(sol.Q);
    sol.V.resize(idx(M.n));
    for (Index i = 0; i < M.n; ++i) sol.V(idx(i)) = sol.Q(idx(i), idx(sol.policy[i]));
    return sol;
}

double Qmdp::q(const Belief& b, Index a) const { return b.probs().dot(q_mdp_.col(idx(a))); }

double Qmdp::value(const Belief& b) const { return q(b, action(b)); }

Index Qmdp::action(const Belief& b) const {
    Index best = 0;
    double top = q(b, 0);
    for (Index a = 1; a < static_cast<Index>(q_mdp_.cols()); ++a) {
        const double v = q(b, a);
        if (v > top) {
            top = v;
            best = a;
        }
    }
    return best;
}

Qmdp qmdp(const PomdpModel& m, double eps) {
    return Qmdp(value_iteration(underlying_mdp(m), eps).Q);
}

double tree_value(const PomdpModel& m, const Belief& b, std::size_t horizon, Dynamics dynamics,
                  const RewardSpec& reward) {
    TreeOracle oracle(m, dynamics, reward);
    return oracle.value(b, horizon);
}

PlanResult enumerate_plans(const PomdpModel& m, const Belief& b0, std::size_t horizon,
                           const RewardSpec& reward, bool keep_table) {
    const std::size_t A = m.num_actions;
    std::size_t sequences = 1;
    for (std::size_t t = 0; t < horizon; ++t) {
        if (sequences > kPlanBudget / A)
            throw BudgetExceeded("A^T exceeds " + std::to_string(kPlanBudget) + " sequences");
        sequences *= A;
    }

    PlanResult out;
    out.best_value = -std::numeric_limits<double>::infinity();
    if (keep_table) out.per_sequence_values.emplace().reserve(sequences);

    // Depth-first over sequences in lexicographic order, sharing prefixes.
    std::vector<Index> seq;
    auto walk = [&](auto&& self, const Belief& b, double acc, double weight) -> void {
        if (seq.size() == horizon) {
            if (keep_table) out.per_sequence_values->push_back(acc);
            if (acc > out.best_value) {
                out.best_value = acc;
                out.best_sequence = seq;
            }
            return;
        }
        for (Index a = 0; a < A; ++a) {
            seq.push_back(a);
            const double r = belief_reward(m, b, a, reward);
            if (seq.size() == horizon)
                self(self, b, acc + weight * r, weight * m.discount);
            else
                self(self, open_loop_propagate(m, b, a), acc + weight * r, weight * m.discount);
            seq.pop_back();
        }
    };
    walk(walk, b0, 0.0, 1.0);

    out.policy_value = tree_value(m, b0, horizon, Dynamics::Open, reward);
    out.agree = std::abs(out.best_value - out.policy_value) <= kAgreeTolerance;
    return out;
}

}  // namespace bml
