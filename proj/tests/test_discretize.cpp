#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "bml/discretize.hpp"
#include "bml/fixtures.hpp"

using namespace bml;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Lowest index among the L1-nearest points, by scanning the whole grid.
Index brute_snap(const BeliefGrid& g, const Belief& b) {
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < g.size(); ++i) best = std::min(best, (g.point(i).probs() - b.probs()).lpNorm<1>());
    for (Index i = 0; i < g.size(); ++i)
        if ((g.point(i).probs() - b.probs()).lpNorm<1>() <= best + 1e-12) return i;
    return g.size();
}

}  // namespace

TEST_CASE("grid size is the number of compositions") {
    for (std::size_t S = 1; S <= 5; ++S)
        for (std::size_t m = 1; m <= 8; ++m) {
            const BeliefGrid g(S, m);
            const double expected =
                factorial(static_cast<int>(m + S - 1)) /
                (factorial(static_cast<int>(m)) * factorial(static_cast<int>(S - 1)));
            CHECK(static_cast<double>(g.size()) == expected);
            CHECK(g.size() == binomial(m + S - 1, S - 1));
        }
    CHECK(BeliefGrid(3, 10).size() == 66);
    CHECK(BeliefGrid(2, 100).size() == 101);
}

TEST_CASE("grid construction errors") {
    CHECK_THROWS_AS(BeliefGrid(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(BeliefGrid(3, 0), std::invalid_argument);
    CHECK_THROWS_AS(BeliefGrid(10, 200), std::length_error);
}

TEST_CASE("points are distinct, on the simplex and in lexicographic order") {
    const BeliefGrid g(4, 6);
    std::set<std::vector<int>> seen;
    std::vector<int> prev;
    for (Index i = 0; i < g.size(); ++i) {
        const auto c = g.composition(i);
        std::vector<int> v(c.begin(), c.end());
        CHECK(std::accumulate(v.begin(), v.end(), 0) == 6);
        CHECK(g.point(i).probs().sum() == doctest::Approx(1.0).epsilon(1e-15));
        if (i > 0) CHECK(std::lexicographical_compare(prev.begin(), prev.end(), v.begin(), v.end()));
        CHECK(seen.insert(v).second);
        CHECK(g.index_of(c) == i);
        prev = v;
    }
    CHECK(g.composition(0)[3] == 6);
}

TEST_CASE("snap of a grid point is itself") {
    const BeliefGrid g(3, 12);
    for (Index i = 0; i < g.size(); ++i) CHECK(g.snap(g.point(i)) == i);
}

TEST_CASE("snap matches brute-force L1 search") {
    for (std::size_t S = 2; S <= 5; ++S)
        for (std::size_t m : {1u, 3u, 7u, 10u}) {
            const BeliefGrid g(S, m);
            for (std::uint64_t seed = 0; seed < 40; ++seed) {
                const Belief b(fixtures::dirichlet(S, seed * 31 + S * 7 + m));
                const Index got = g.snap(b);
                CHECK(got == brute_snap(g, b));
                CHECK(g.l1_distance(b, got) ==
                      doctest::Approx((g.point(got).probs() - b.probs()).lpNorm<1>()));
            }
        }
}

TEST_CASE("snap ties go to the lowest index") {
    const BeliefGrid two(2, 2);
    CHECK(two.snap(Belief(Eigen::Vector2d(0.25, 0.75))) == 0);
    CHECK(two.snap(Belief(Eigen::Vector2d(0.75, 0.25))) == 1);

    // every belief with entries in eighths lands exactly between points of the m = 4 grid
    const BeliefGrid g(3, 4);
    const BeliefGrid fine(3, 8);
    for (Index j = 0; j < fine.size(); ++j) {
        const Belief& b = fine.point(j);
        CHECK(g.snap(b) == brute_snap(g, b));
    }
    CHECK(BeliefGrid(3, 1).snap(Belief::uniform(3)) == 0);
}

TEST_CASE("snap rejects a belief of the wrong dimension") {
    CHECK_THROWS_AS(BeliefGrid(3, 4).snap(Belief::uniform(2)), std::invalid_argument);
}

TEST_CASE("binomial") {
    CHECK(binomial(5, 2) == 10);
    CHECK(binomial(5, 7) == 0);
    CHECK(binomial(60, 30) == 118264581564861424ULL);
    CHECK(binomial(1000, 500) == std::numeric_limits<std::size_t>::max());
}

TEST_CASE("compiled belief MDPs are stochastic") {
    const PomdpModel m = fixtures::random_model({3, 2, 3, 0.9, 5});
    const BeliefGrid g(3, 8);
    for (Dynamics d : {Dynamics::Closed, Dynamics::Open})
        for (RewardKind k : {RewardKind::Task, RewardKind::Efe, RewardKind::ActiveSensing}) {
            const FiniteMdp M = compile_belief_mdp(m, g, d, {k});
            CHECK_NOTHROW(check_finite_mdp(M));
            CHECK(M.n == g.size());
            CHECK(M.discount == m.discount);
            CHECK(M.mu(static_cast<Eigen::Index>(g.snap(Belief(m.initial_belief)))) == 1.0);
            CHECK(M.provenance.dynamics == d);
            CHECK(M.provenance.reward_kind == k);
            for (Index i = 0; i < M.n; ++i)
                for (Index a = 0; a < M.num_actions; ++a) {
                    CHECK(M.rew(i, a) == belief_reward(m, g.point(i), a, {k}));
                    if (d == Dynamics::Open) {
                        REQUIRE(M.successors(i, a).size() == 1);
                        CHECK(M.successors(i, a)[0].next ==
                              g.snap(open_loop_propagate(m, g.point(i), a)));
                    }
                }
        }
}

TEST_CASE("closed successors carry the observation mass") {
    const PomdpModel m = fixtures::random_model({3, 2, 4, 0.9, 12});
    const BeliefGrid g(3, 9);
    const FiniteMdp M = compile_belief_mdp(m, g, Dynamics::Closed, {RewardKind::Task});
    for (Index i = 0; i < g.size(); i += 3)
        for (Index a = 0; a < 2; ++a) {
            std::map<Index, double> oracle;
            const Eigen::VectorXd po = obs_predictive(m, g.point(i), a);
            for (Index o = 0; o < 4; ++o)
                if (po(static_cast<Eigen::Index>(o)) > 0)
                    oracle[g.snap(belief_update(m, g.point(i), a, o))] += po(static_cast<Eigen::Index>(o));
            const auto& succ = M.successors(i, a);
            REQUIRE(succ.size() == oracle.size());
            std::size_t k = 0;
            for (const auto& [next, prob] : oracle) {
                CHECK(succ[k].next == next);
                CHECK(succ[k].prob == doctest::Approx(prob).epsilon(1e-13));
                ++k;
            }
        }
}

TEST_CASE("uninformative emission: closed and open compile identically") {
    const PomdpModel m = fixtures::tiger_uniform_emission();
    const BeliefGrid g(2, 50);
    const FiniteMdp c = compile_belief_mdp(m, g, Dynamics::Closed, {RewardKind::Task});
    const FiniteMdp o = compile_belief_mdp(m, g, Dynamics::Open, {RewardKind::Task});
    for (Index i = 0; i < g.size(); ++i)
        for (Index a = 0; a < 3; ++a) {
            REQUIRE(c.successors(i, a).size() == 1);
            CHECK(c.successors(i, a)[0].next == o.successors(i, a)[0].next);
            CHECK(c.successors(i, a)[0].prob == doctest::Approx(1.0).epsilon(1e-14));
        }
}

TEST_CASE("underlying MDP") {
    const PomdpModel m = fixtures::tiger();
    const FiniteMdp M = underlying_mdp(m);
    CHECK(M.n == 2);
    CHECK(M.num_actions == 3);
    CHECK(M.rew == m.reward);
    CHECK(M.mu == m.initial_belief);
    for (Index s = 0; s < 2; ++s)
        for (Index a = 0; a < 3; ++a)
            CHECK(M.row(s, a) == m.transition[a].row(static_cast<Eigen::Index>(s)).transpose());
}

TEST_CASE("finite MDP checks") {
    FiniteMdp M = fixtures::random_finite_mdp(4, 2, 0.9, 3);
    CHECK_NOTHROW(check_finite_mdp(M));
    M.successors(1, 1)[0].prob += 0.1;
    CHECK_THROWS_AS(check_finite_mdp(M), std::invalid_argument);
}
