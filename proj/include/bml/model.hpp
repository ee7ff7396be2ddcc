#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bml {

using Index = std::size_t;

/// How the observation preference P~(o) is built from its logits.
///
/// Normalized: log P~(o) = lambda * logit(o) - log sum exp(lambda * logit).
/// SelfNormalized: log P~(o) = lambda * logit(o), i.e. the partition
/// function is taken to be one. In this convention the EFE reward uses the
/// task reward R(s, a) as the shared pragmatic reward.
enum class PreferenceConvention { Normalized, SelfNormalized };

/// A discrete POMDP with state-only emissions.
///
/// Treated as immutable once built; every other module only reads it.
struct PomdpModel {
    std::string name;
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::size_t num_observations = 0;
    std::vector<Eigen::MatrixXd> transition;  ///< [a](s, s') = P(s'|s,a)
    Eigen::MatrixXd emission;                 ///< (s, o) = P(o|s)
    Eigen::MatrixXd reward;                   ///< (s, a) = R(s,a)
    Eigen::VectorXd preference_logits;        ///< R~(o)
    double lambda = 1.0;
    Eigen::VectorXd initial_belief;
    double discount = 0.95;

    /// max_{s,a} |R(s,a)|
    double r_max() const;

    /// log P~(o) under the given convention.
    Eigen::VectorXd log_preference(PreferenceConvention convention) const;
};

struct Violation {
    std::string path;
    std::string description;
    double magnitude = 0.0;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;

    std::string summary() const;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(ValidationReport report);
    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

/// Checks every invariant and reports all violations, not only the first.
ValidationReport validate_model(const PomdpModel& m);

/// Parses a model document (JSON syntax). Throws ParseError on malformed
/// input and ValidationError when the parsed model breaks an invariant.
PomdpModel parse_model(const std::string& text);
PomdpModel load_model(const std::filesystem::path& path);

/// Serializes with full round-trip precision.
std::string serialize_model(const PomdpModel& m);
void save_model(const PomdpModel& m, const std::filesystem::path& path);

/// Copy of `m` with a different preference temperature.
PomdpModel with_lambda(PomdpModel m, double lambda);

}  // namespace bml
