#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bml/model.hpp"

namespace bml {

enum class Command { Solve, Simulate, Compare, Verify };

struct RunConfig {
    Command command = Command::Solve;
    std::string model_path;  ///< file path or builtin:tiger|uniform|identity
    std::size_t grid = 0;
    std::vector<std::string> planners;  ///< bayes|open|efe|efe_sophisticated|qmdp|active_sensing
    std::optional<double> lambda;
    double epsilon = 1e-9;
    std::size_t episodes = 1000;
    std::size_t horizon = 60;
    std::uint64_t seed = 0;
    std::string out;  ///< empty writes the main table to stdout where allowed
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;

const std::vector<std::string>& planner_names();

/// Loads a model file, or a built-in fixture for builtin:NAME.
PomdpModel resolve_model(const std::string& spec);

/// Executes one command. Returns 0 on success, 1 if a hard check failed and
/// 2 on configuration or model errors; diagnostics go to `log`.
int run(const RunConfig& config, std::ostream& log);

}  // namespace bml
