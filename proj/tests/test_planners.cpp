#include <doctest.h>

#include <cmath>
#include <functional>

#include "bml/fixtures.hpp"
#include "bml/planners.hpp"

using namespace bml;

namespace {

Eigen::MatrixXd dense(const FiniteMdp& M, const std::vector<Index>& pi) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M.n), static_cast<Eigen::Index>(M.n));
    for (Index i = 0; i < M.n; ++i) P.row(static_cast<Eigen::Index>(i)) = M.row(i, pi[i]).transpose();
    return P;
}

// Optimal values by evaluating every deterministic policy with a dense solve.
Eigen::VectorXd brute_force_optimum(const FiniteMdp& M) {
    const auto n = static_cast<Eigen::Index>(M.n);
    Eigen::VectorXd best = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    std::vector<Index> pi(M.n, 0);
    while (true) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) r(i) = M.rew(i, static_cast<Eigen::Index>(pi[static_cast<Index>(i)]));
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
        const Eigen::VectorXd v = (I - M.discount * dense(M, pi)).fullPivLu().solve(r);
        best = best.cwiseMax(v);
        Index k = 0;
        while (k < M.n && ++pi[k] == M.num_actions) pi[k++] = 0;
        if (k == M.n) break;
    }
    return best;
}

// Plain recursion over the belief tree, without memoization.
double naive_tree(const PomdpModel& m, const Belief& b, std::size_t h, Dynamics d,
                  const RewardSpec& spec) {
    if (h == 0) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (Index a = 0; a < m.num_actions; ++a) {
        double v = belief_reward(m, b, a, spec);
        if (d == Dynamics::Open) {
            v += m.discount * naive_tree(m, open_loop_propagate(m, b, a), h - 1, d, spec);
        } else {
            const Eigen::VectorXd po = obs_predictive(m, b, a);
            for (Index o = 0; o < m.num_observations; ++o)
                if (po(static_cast<Eigen::Index>(o)) > 0)
                    v += m.discount * po(static_cast<Eigen::Index>(o)) *
                         naive_tree(m, belief_update(m, b, a, o), h - 1, d, spec);
        }
        best = std::max(best, v);
    }
    return best;
}

}  // namespace

TEST_CASE("value iteration: single state") {
    FiniteMdp M;
    M.n = 1;
    M.num_actions = 2;
    M.trans = {{{0, 1.0}}, {{0, 1.0}}};
    M.rew = Eigen::MatrixXd(1, 2);
    M.rew << 0.3, 1.7;
    M.mu = Eigen::VectorXd::Ones(1);
    M.discount = 0.95;
    const Solution s = value_iteration(M, 1e-10);
    CHECK(std::abs(s.V(0) - 1.7 / 0.05) <= 1e-10);
    CHECK(s.policy[0] == 1);
    CHECK(s.V(0) == s.Q.row(0).maxCoeff());
}

TEST_CASE("value iteration: two-state chain closed form") {
    // state 0: stay (r = 0) or move to 1 (r = -1); state 1 absorbs with r = 1
    FiniteMdp M;
    M.n = 2;
    M.num_actions = 2;
    M.trans = {{{0, 1.0}}, {{1, 1.0}}, {{1, 1.0}}, {{1, 1.0}}};
    M.rew = Eigen::MatrixXd(2, 2);
    M.rew << 0.0, -1.0, 1.0, 1.0;
    M.mu = Eigen::Vector2d(1.0, 0.0);
    M.discount = 0.9;
    const Solution s = value_iteration(M, 1e-12);
    CHECK(std::abs(s.V(1) - 10.0) <= 1e-11);
    CHECK(std::abs(s.V(0) - (-1.0 + 0.9 * 10.0)) <= 1e-11);
    CHECK(s.policy[0] == 1);
    CHECK(s.policy[1] == 0);
}

TEST_CASE("value iteration matches brute-force policy search") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const double gamma = seed % 2 ? 0.95 : 0.5;
        const FiniteMdp M = fixtures::random_finite_mdp(4, 3, gamma, seed);
        const Solution s = value_iteration(M, 1e-9);
        const Eigen::VectorXd oracle = brute_force_optimum(M);
        CHECK((s.V - oracle).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(s.residual <= 1e-9 * (1 - gamma) / (2 * gamma));
        // the greedy policy is optimal
        const auto n = static_cast<Eigen::Index>(M.n);
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) r(i) = M.rew(i, static_cast<Eigen::Index>(s.policy[static_cast<Index>(i)]));
        const Eigen::VectorXd v =
            (Eigen::MatrixXd::Identity(n, n) - gamma * dense(M, s.policy)).fullPivLu().solve(r);
        CHECK((v - oracle).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("greedy breaks ties toward the lowest action") {
    Eigen::MatrixXd Q(3, 3);
    Q << 1, 1, 0, 0, 2, 2, 5, 5, 5;
    const auto pi = greedy(Q);
    CHECK(pi == std::vector<Index>{0, 1, 0});
}

TEST_CASE("QMDP is linear in the belief and exact at vertices") {
    const PomdpModel m = fixtures::random_model({4, 3, 2, 0.9, 21});
    const Qmdp q = qmdp(m);
    const Solution mdp = value_iteration(underlying_mdp(m), 1e-10);
    for (Index s = 0; s < 4; ++s)
        CHECK(q.value(Belief::delta(4, s)) == doctest::Approx(mdp.V(static_cast<Eigen::Index>(s))).epsilon(1e-12));
    const Belief b1(fixtures::dirichlet(4, 1)), b2(fixtures::dirichlet(4, 2));
    const Belief mix(0.3 * b1.probs() + 0.7 * b2.probs());
    for (Index a = 0; a < 3; ++a)
        CHECK(q.q(mix, a) == doctest::Approx(0.3 * q.q(b1, a) + 0.7 * q.q(b2, a)).epsilon(1e-12));
    CHECK(q.value(mix) <= 0.3 * q.value(b1) + 0.7 * q.value(b2) + 1e-12);
}

TEST_CASE("tiger QMDP prefers listening at the uniform belief") {
    // fully observed, the agent opens the safe door forever: 10 / (1 - 0.95)
    const Qmdp q = qmdp(fixtures::tiger());
    CHECK(q.value(Belief::delta(2, 0)) == doctest::Approx(200.0).epsilon(1e-9));
    CHECK(q.action(Belief::delta(2, 0)) == 2);
    CHECK(q.action(Belief::uniform(2)) == 0);
}

TEST_CASE("tree value: trivial horizons") {
    const PomdpModel m = fixtures::tiger();
    const Belief b(Eigen::Vector2d(0.3, 0.7));
    CHECK(tree_value(m, b, 0, Dynamics::Closed, {}) == 0.0);
    const double one = tree_value(m, b, 1, Dynamics::Closed, {});
    CHECK(one == doctest::Approx(std::max({-1.0, 0.3 * -100 + 0.7 * 10, 0.3 * 10 + 0.7 * -100})));
}

TEST_CASE("tree value agrees with plain recursion") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const PomdpModel m = fixtures::random_model({3, 2, 3, 0.9, seed});
        const Belief b(m.initial_belief);
        for (std::size_t h = 1; h <= 4; ++h)
            for (Dynamics d : {Dynamics::Closed, Dynamics::Open})
                for (RewardKind k : {RewardKind::Task, RewardKind::Efe}) {
                    const RewardSpec spec{k};
                    CHECK(tree_value(m, b, h, d, spec) ==
                          doctest::Approx(naive_tree(m, b, h, d, spec)).epsilon(1e-12));
                }
    }
}

TEST_CASE("closed loop is never worse than open loop on the tree") {
    const PomdpModel m = fixtures::tiger();
    for (std::size_t h = 1; h <= 6; ++h) {
        const double closed = tree_value(m, Belief::uniform(2), h, Dynamics::Closed, {});
        const double open = tree_value(m, Belief::uniform(2), h, Dynamics::Open, {});
        CHECK(closed >= open - 1e-12);
    }
}

TEST_CASE("open-loop plan enumeration on tiger") {
    const PomdpModel m = fixtures::tiger();
    const Belief b0 = Belief::uniform(2);
    for (std::size_t T = 1; T <= 4; ++T) {
        const RewardSpec spec{RewardKind::Efe, PreferenceConvention::SelfNormalized};
        const PlanResult r = enumerate_plans(m, b0, T, spec, true);
        REQUIRE(r.per_sequence_values);
        CHECK(r.per_sequence_values->size() == static_cast<std::size_t>(std::pow(3, T)));

        // direct scoring of every sequence in lexicographic order
        double best = -std::numeric_limits<double>::infinity();
        std::vector<Index> best_seq;
        for (std::size_t code = 0; code < r.per_sequence_values->size(); ++code) {
            std::vector<Index> seq(T);
            std::size_t c = code;
            for (std::size_t t = T; t-- > 0;) {
                seq[t] = c % 3;
                c /= 3;
            }
            Belief b = b0;
            double value = 0.0, w = 1.0;
            for (Index a : seq) {
                value += w * belief_reward(m, b, a, spec);
                w *= m.discount;
                b = open_loop_propagate(m, b, a);
            }
            CHECK((*r.per_sequence_values)[code] == doctest::Approx(value).epsilon(1e-12));
            if (value > best) {
                best = value;
                best_seq = seq;
            }
        }
        CHECK(r.best_value == doctest::Approx(best).epsilon(1e-12));
        CHECK(r.best_sequence == best_seq);
        CHECK(r.agree);
        CHECK(std::abs(r.best_value - r.policy_value) <= 1e-9);
    }
}

TEST_CASE("plan enumeration budget") {
    const PomdpModel m = fixtures::tiger();
    CHECK_THROWS_AS(enumerate_plans(m, Belief::uniform(2), 13), BudgetExceeded);
    CHECK_NOTHROW(enumerate_plans(m, Belief::uniform(2), 6));
}
