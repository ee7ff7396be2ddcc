#include <iostream>

#include <CLI11.hpp>

#include "bml/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Discrete POMDP planning and bound verification"};
    app.require_subcommand(1);

    bml::RunConfig config;
    std::string planners;
    double lambda = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--model", config.model_path,
                        "Model JSON path or builtin:tiger|uniform|identity")
            ->required();
        sub->add_option("--grid", config.grid, "Belief grid resolution m")->required();
        sub->add_option("--epsilon", config.epsilon, "Value iteration tolerance");
        sub->add_option("--lambda", lambda, "Preference temperature override");
        sub->add_option("--seed", config.seed, "Random seed");
        sub->add_option("--out", config.out, "Output CSV path");
        sub->add_option("--planner", planners,
                        "bayes|open|efe|efe_sophisticated|qmdp|active_sensing, comma separated");
        sub->add_option("--episodes", config.episodes, "Monte Carlo episodes");
        sub->add_option("--horizon", config.horizon, "Rollout horizon");
    };

    CLI::App* solve = app.add_subcommand("solve", "Value and policy on the belief grid");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo returns of one planner");
    CLI::App* compare = app.add_subcommand("compare", "Gap table and performance-gap bounds");
    CLI::App* verify = app.add_subcommand("verify", "Run the full property suite");
    for (CLI::App* sub : {solve, simulate, compare, verify}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return bml::kExitConfig;
    }

    if (solve->parsed()) config.command = bml::Command::Solve;
    if (simulate->parsed()) config.command = bml::Command::Simulate;
    if (compare->parsed()) config.command = bml::Command::Compare;
    if (verify->parsed()) config.command = bml::Command::Verify;

    for (const CLI::App* sub : {solve, simulate, compare, verify})
        if (sub->parsed() && sub->count("--lambda")) config.lambda = lambda;

    std::size_t start = 0;
    while (start < planners.size()) {
        std::size_t comma = planners.find(',', start);
        if (comma == std::string::npos) comma = planners.size();
        if (comma > start) config.planners.push_back(planners.substr(start, comma - start));
        start = comma + 1;
    }

    const int code = bml::run(config, std::cerr);
    if (code == bml::kExitConfig) std::cerr << app.help();
    return code;
}
