#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bml/cli.hpp"
#include "bml/fixtures.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BML_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "bml_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("configuration errors exit with 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("solve --model builtin:tiger --grid 0 --planner bayes") == 2);
    CHECK(run_cli("solve --model builtin:nope --grid 4 --planner bayes") == 2);
    CHECK(run_cli("solve --model /nonexistent.json --grid 4 --planner bayes") == 2);
    CHECK(run_cli("solve --model builtin:tiger --grid 4 --planner magic") == 2);
    CHECK(run_cli("solve --model builtin:tiger --grid 4 --planner bayes,open") == 2);
    CHECK(run_cli("simulate --model builtin:tiger --grid 4 --planner bayes") == 2);
    CHECK(run_cli("solve --model builtin:tiger --grid 4 --planner bayes --lambda 0") == 2);
    CHECK(run_cli("solve --model builtin:tiger") == 2);
}

TEST_CASE("invalid model file exits with 2") {
    const fs::path bad = scratch("bad.json");
    std::ofstream(bad) << "{\"num_states\": 2";
    CHECK(run_cli("solve --model " + bad.string() + " --grid 4 --planner bayes") == 2);
}

TEST_CASE("solve writes one row per grid point") {
    const fs::path out = scratch("solve.csv");
    REQUIRE(run_cli("solve --model builtin:tiger --grid 10 --planner bayes --out " + out.string()) == 0);
    const std::string text = slurp(out);
    CHECK(first_line(text) == "grid_index,b0,b1,V,action");
    CHECK(std::count(text.begin(), text.end(), '\n') == 12);
}

TEST_CASE("solve from a model file") {
    const fs::path model = scratch("tiger.json");
    bml::save_model(bml::fixtures::tiger(), model);
    const fs::path a = scratch("file.csv"), b = scratch("builtin.csv");
    REQUIRE(run_cli("solve --model " + model.string() + " --grid 8 --planner open --out " + a.string()) == 0);
    REQUIRE(run_cli("solve --model builtin:tiger --grid 8 --planner open --out " + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("simulate is reproducible byte for byte") {
    const fs::path a = scratch("sim_a.csv"), b = scratch("sim_b.csv");
    const std::string args = "simulate --model builtin:tiger --grid 20 --planner qmdp --episodes 200 --seed 7 --out ";
    REQUIRE(run_cli(args + a.string()) == 0);
    REQUIRE(run_cli(args + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a.string() + ".summary.csv") == slurp(b.string() + ".summary.csv"));
    CHECK(first_line(slurp(a)) == "episode,discounted_return");
    CHECK(first_line(slurp(a.string() + ".summary.csv")) ==
          "planner,mean,stderr,episodes,horizon,truncation_bound");
}

TEST_CASE("compare writes the gap table and bounds") {
    const fs::path out = scratch("compare.csv");
    REQUIRE(run_cli("compare --model builtin:tiger --grid 20 --out " + out.string()) == 0);
    const std::string table = slurp(out);
    CHECK(first_line(table) == "planner,J_in_true_mdp,gap_from_bayes,bound_rhs,bound_holds");
    for (const auto& name : bml::planner_names()) CHECK(table.find("\n" + name + ",") != std::string::npos);
    CHECK(first_line(slurp(out.string() + ".bounds.csv")) == "check_name,lhs,rhs,slack,holds,notes");
}

TEST_CASE("verify passes on the shipped fixtures") {
    for (const char* model : {"builtin:uniform", "builtin:identity", "builtin:tiger"}) {
        const fs::path out = scratch(std::string("verify_") + (model + 8) + ".csv");
        CHECK_MESSAGE(run_cli(std::string("verify --model ") + model + " --grid 30 --episodes 200 --out " +
                              out.string()) == 0,
                      model);
        CHECK(first_line(slurp(out)) == "check_name,lhs,rhs,slack,holds,notes");
    }
}

TEST_CASE("run reports configuration errors without throwing") {
    std::ostringstream log;
    bml::RunConfig cfg;
    cfg.model_path = "builtin:tiger";
    cfg.grid = 0;
    cfg.planners = {"bayes"};
    CHECK(bml::run(cfg, log) == bml::kExitConfig);
    CHECK_FALSE(log.str().empty());
}
