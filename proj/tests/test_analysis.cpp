#include <doctest.h>

#include <array>
#include <cmath>

#include "bml/analysis.hpp"
#include "bml/fixtures.hpp"

using namespace bml;

namespace {

Eigen::MatrixXd dense(const FiniteMdp& M, const Policy& pi) {
    const auto n = static_cast<Eigen::Index>(M.n);
    Eigen::MatrixXd P(n, n);
    for (Index i = 0; i < M.n; ++i) P.row(static_cast<Eigen::Index>(i)) = M.row(i, pi[i]).transpose();
    return P;
}

Eigen::VectorXd dense_value(const FiniteMdp& M, const Policy& pi) {
    const auto n = static_cast<Eigen::Index>(M.n);
    Eigen::VectorXd r(n);
    for (Index i = 0; i < M.n; ++i) r(static_cast<Eigen::Index>(i)) = M.rew(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(pi[i]));
    return (Eigen::MatrixXd::Identity(n, n) - M.discount * dense(M, pi)).fullPivLu().solve(r);
}

Policy random_policy(std::size_t n, std::size_t A, std::uint64_t seed) {
    Policy pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = (seed * 2654435761u + i * 40503u) % A;
    return pi;
}

const BoundReport& find(const std::vector<BoundReport>& reports, const std::string& name) {
    for (const auto& r : reports)
        if (r.name == name) return r;
    FAIL("missing report " << name);
    return reports.front();
}

}  // namespace

TEST_CASE("occupancy matches the truncated series") {
    const FiniteMdp M = fixtures::random_finite_mdp(5, 3, 0.9, 4);
    const Policy pi = random_policy(5, 3, 9);
    const Occupancy occ = occupancy(M, pi);

    const Eigen::MatrixXd P = dense(M, pi);
    Eigen::RowVectorXd row = M.mu.transpose();
    Eigen::VectorXd series = Eigen::VectorXd::Zero(5);
    double w = 1.0;
    for (int t = 0; t < 400; ++t) {
        series += w * row.transpose();
        row = row * P;
        w *= M.discount;
    }
    series *= 1.0 - M.discount;
    CHECK((occ.state_marginal() - series).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(occ.d.sum() == doctest::Approx(1.0).epsilon(1e-13));
    for (Index i = 0; i < 5; ++i)
        for (Index a = 0; a < 3; ++a)
            if (a != pi[i]) CHECK(occ.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) == 0.0);
}

TEST_CASE("policy evaluation") {
    const FiniteMdp M = fixtures::random_finite_mdp(6, 2, 0.95, 8);
    const Policy pi = random_policy(6, 2, 3);
    const PolicyValue v = evaluate_policy(M, pi);
    CHECK((v.V - dense_value(M, pi)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(v.J == doctest::Approx(M.mu.dot(v.V)).epsilon(1e-12));
    const Occupancy occ = occupancy(M, pi);
    CHECK(v.J == doctest::Approx((occ.d.array() * M.rew.array()).sum() / (1 - M.discount)).epsilon(1e-10));
    for (Index i = 0; i < 6; ++i) CHECK(std::abs(v.advantage()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(pi[i]))) < 1e-10);
}

TEST_CASE("three-term decomposition of the performance gap") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const double gamma = std::array{0.5, 0.9, 0.95}[seed % 3];
        const FiniteMdp M = fixtures::random_finite_mdp(3 + seed % 6, 2 + seed % 3, gamma, seed);
        const auto kind = static_cast<fixtures::Mismatch>(seed % 3);
        const FiniteMdp Mp = fixtures::perturbed_finite_mdp(M, kind, 0.4, seed + 100);
        const Policy pi = random_policy(M.n, M.num_actions, seed);
        const Policy pip = value_iteration(Mp, 1e-11).policy;
        const GapReport g = pdl_decompose(M, Mp, pi, pip);

        const double direct = M.mu.dot(dense_value(M, pi)) - M.mu.dot(dense_value(M, pip));
        CHECK(g.direct_gap == doctest::Approx(direct).epsilon(1e-9));
        CHECK(g.identity_residual <= 1e-8 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("decomposition in a single MDP reduces to the advantage term") {
    const FiniteMdp M = fixtures::random_finite_mdp(5, 3, 0.9, 77);
    const GapReport g = pdl_decompose(M, M, random_policy(5, 3, 1), value_iteration(M, 1e-11).policy);
    CHECK(std::abs(g.reward_model_advantage_term) < 1e-12);
    CHECK(std::abs(g.reward_model_disadvantage_term) < 1e-12);
    CHECK(g.direct_gap <= 1e-9);
    CHECK(std::abs(g.direct_gap - g.policy_advantage_term) < 1e-9);
}

TEST_CASE("incompatible MDPs are rejected") {
    const FiniteMdp M = fixtures::random_finite_mdp(4, 2, 0.9, 1);
    const FiniteMdp other = fixtures::random_finite_mdp(5, 2, 0.9, 2);
    CHECK_THROWS_AS(pdl_decompose(M, other, Policy(4, 0), Policy(4, 0)), std::invalid_argument);
}

TEST_CASE("density ratio") {
    Occupancy expert{Eigen::MatrixXd(3, 1)}, other{Eigen::MatrixXd(3, 1)};
    expert.d << 0.5, 0.5, 0.0;
    other.d << 0.25, 0.25, 0.5;
    const DensityRatio r = density_ratio(expert, other);
    CHECK(r.C == 0.5);
    CHECK(r.mismatch_cells == 1);
    CHECK(r.mismatch_mass == 0.5);

    other.d << 0.9, 0.1, 0.0;
    CHECK(density_ratio(expert, other).C == doctest::Approx(1.8));
    CHECK(density_ratio(expert, other).mismatch_cells == 0);
}

TEST_CASE("gap bound holds or is reported unbounded") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const FiniteMdp M = fixtures::random_finite_mdp(4, 2, 0.9, seed);
        const FiniteMdp Mp = fixtures::perturbed_finite_mdp(M, fixtures::Mismatch::Both, 0.5, seed + 1);
        const BoundReport r = pdl_bound(M, Mp, random_policy(4, 2, seed), value_iteration(Mp, 1e-11).policy);
        CHECK(r.holds);
        if (std::isinf(r.rhs)) CHECK(r.notes.find("unbounded ratio") != std::string::npos);
        const BoundReport adv = model_advantage_check(M, Mp, random_policy(4, 2, seed + 5));
        CHECK(adv.holds);
    }
}

TEST_CASE("value of observing") {
    const Belief u = Belief::uniform(2);
    const EvpoResult id = evpo(fixtures::tiger_identity_emission(), u, RewardKind::Task);
    CHECK(id.ev == doctest::Approx(-1.0));
    CHECK(id.ev_po == doctest::Approx(10.0));
    CHECK(id.evpo == doctest::Approx(11.0));
    CHECK(id.expected_kl == doctest::Approx(std::log(2.0)));

    const EvpoResult none = evpo(fixtures::tiger_uniform_emission(), u, RewardKind::Task);
    CHECK(std::abs(none.evpo) < 1e-12);
    CHECK(std::abs(none.expected_kl) < 1e-12);

    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const PomdpModel m = fixtures::random_model({3, 3, 3, 0.9, seed});
        const Belief b(fixtures::dirichlet(3, seed + 500));
        CHECK(evpo(m, b, RewardKind::Task).evpo >= -1e-12);
    }
    CHECK_THROWS_AS(evpo(fixtures::tiger(), u, RewardKind::ActiveSensing), std::invalid_argument);
}

TEST_CASE("grid slack") {
    const PomdpModel m = fixtures::tiger();
    CHECK(grid_slack(m, BeliefGrid(2, 100)) == doctest::Approx(4 * 100.0 / (0.05 * 0.05 * 100)));
}

TEST_CASE("tiger grid checks") {
    const PomdpModel m = fixtures::tiger();
    const BeliefGrid g(2, 40);
    const GridSolutions sol = solve_grid(m, g);
    CHECK(closed_dominates_open(m, g, sol).holds);
    CHECK(concavity_check(m, 200, 3).holds);

    const auto bounds = bound_checks(m, g, 100, 1);
    for (const auto& r : bounds)
        if (!r.informational) CHECK_MESSAGE(r.holds, r.name);

    const auto thm = theorem1_check(m, g, sol);
    CHECK(find(thm, "theorem1_open").holds);
    CHECK(find(thm, "theorem1_efe").holds);
    CHECK(find(thm, "theorem1_rhs_difference").lhs <= 1e-12);
    CHECK(find(thm, "theorem1_efe_vs_open").informational);
}

TEST_CASE("assumption checks are informational") {
    const PomdpModel m = fixtures::tiger();
    const BeliefGrid g(2, 20);
    for (const auto& r : assumption_checks(m, g, 200, 30, 5)) CHECK(r.informational);
}
