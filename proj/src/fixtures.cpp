#include "bml/fixtures.hpp"

#include <random>

namespace bml::fixtures {

namespace {

Eigen::Index idx(Index k) { return static_cast<Eigen::Index>(k); }

Eigen::VectorXd dirichlet_row(std::size_t n, std::mt19937_64& rng) {
    std::exponential_distribution<double> unit(1.0);
    Eigen::VectorXd v(idx(n));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = unit(rng);
    return v / v.sum();
}

Eigen::MatrixXd stochastic_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    Eigen::MatrixXd out(idx(rows), idx(cols));
    for (std::size_t r = 0; r < rows; ++r) out.row(idx(r)) = dirichlet_row(cols, rng).transpose();
    return out;
}

Eigen::MatrixXd uniform_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd out(idx(rows), idx(cols));
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = u(rng);
    return out;
}

}  // namespace

PomdpModel tiger() {
    PomdpModel m;
    m.name = "tiger";
    m.num_states = 2;
    m.num_actions = 3;
    m.num_observations = 2;
    const Eigen::MatrixXd reset = Eigen::MatrixXd::Constant(2, 2, 0.5);
    m.transition = {Eigen::MatrixXd::Identity(2, 2), reset, reset};
    m.emission.resize(2, 2);
    m.emission << 0.85, 0.15,
                  0.15, 0.85;
    m.reward.resize(2, 3);
    m.reward << -1.0, -100.0, 10.0,
                -1.0, 10.0, -100.0;
    m.preference_logits = Eigen::VectorXd::Zero(2);
    m.lambda = 1.0;
    m.initial_belief = Eigen::VectorXd::Constant(2, 0.5);
    m.discount = 0.95;
    return m;
}

PomdpModel tiger_uniform_emission() {
    PomdpModel m = with_uniform_emission(tiger());
    m.name = "tiger-uniform-emission";
    return m;
}

PomdpModel tiger_identity_emission() {
    PomdpModel m = with_identity_emission(tiger());
    m.name = "tiger-identity-emission";
    return m;
}

PomdpModel random_model(const RandomModelSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    PomdpModel m;
    m.name = "random-" + std::to_string(spec.seed);
    m.num_states = spec.num_states;
    m.num_actions = spec.num_actions;
    m.num_observations = spec.num_observations;
    for (std::size_t a = 0; a < spec.num_actions; ++a)
        m.transition.push_back(stochastic_matrix(spec.num_states, spec.num_states, rng));
    m.emission = stochastic_matrix(spec.num_states, spec.num_observations, rng);
    m.reward = uniform_matrix(spec.num_states, spec.num_actions, rng);
    m.preference_logits = uniform_matrix(spec.num_observations, 1, rng).col(0);
    m.initial_belief = dirichlet_row(spec.num_states, rng);
    m.discount = spec.discount;
    return m;
}

PomdpModel with_uniform_emission(PomdpModel m) {
    m.emission = Eigen::MatrixXd::Constant(idx(m.num_states), idx(m.num_observations),
                                           1.0 / static_cast<double>(m.num_observations));
    return m;
}

PomdpModel with_identity_emission(PomdpModel m) {
    m.num_observations = m.num_states;
    m.emission = Eigen::MatrixXd::Identity(idx(m.num_states), idx(m.num_states));
    if (m.preference_logits.size() != idx(m.num_states))
        m.preference_logits = Eigen::VectorXd::Zero(idx(m.num_states));
    return m;
}

Eigen::VectorXd dirichlet(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return dirichlet_row(n, rng);
}

FiniteMdp random_finite_mdp(std::size_t n, std::size_t num_actions, double discount,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    FiniteMdp M;
    M.n = n;
    M.num_actions = num_actions;
    M.discount = discount;
    M.trans.assign(n * num_actions, {});
    for (Index i = 0; i < n; ++i)
        for (Index a = 0; a < num_actions; ++a) {
            const Eigen::VectorXd p = dirichlet_row(n, rng);
            for (Index j = 0; j < n; ++j) M.successors(i, a).push_back({j, p(idx(j))});
        }
    M.rew = uniform_matrix(n, num_actions, rng);
    M.mu = dirichlet_row(n, rng);
    M.provenance.model_name = "random-mdp-" + std::to_string(seed);
    return M;
}

FiniteMdp perturbed_finite_mdp(const FiniteMdp& base, Mismatch kind, double strength,
                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    FiniteMdp M = base;
    M.provenance.model_name = base.provenance.model_name + "-perturbed";
    if (kind != Mismatch::DynamicsOnly) {
        const Eigen::MatrixXd noise = uniform_matrix(base.n, base.num_actions, rng);
        M.rew = (1.0 - strength) * base.rew + strength * noise;
    }
    if (kind != Mismatch::RewardOnly) {
        for (Index i = 0; i < base.n; ++i)
            for (Index a = 0; a < base.num_actions; ++a) {
                const Eigen::VectorXd fresh = dirichlet_row(base.n, rng);
                const Eigen::VectorXd mixed = (1.0 - strength) * base.row(i, a) + strength * fresh;
                auto& out = M.successors(i, a);
                out.clear();
                for (Index j = 0; j < base.n; ++j)
                    if (mixed(idx(j)) > 0.0) out.push_back({j, mixed(idx(j))});
            }
    }
    return M;
}

}  // namespace bml::fixtures
