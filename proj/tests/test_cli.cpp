// End-to-end tests of the command-line tool, driven through a shell.
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "orbe/bench.hpp"
#include "orbe/model.hpp"
#include "test_util.hpp"

using testutil::fixture_path;

namespace {

struct CliResult {
    int status = -1;
    std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    CliResult r;
    std::string cmd = env_prefix + "\"" + ORBE_CLI_PATH + "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, got);
    int rc = pclose(pipe);
    r.status = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("version flag") {
    CliResult r = run_cli("--version");
    CHECK(r.status == 0);
    CHECK(contains(r.output, "0.1.0"));
}

TEST_CASE("solve prints the robust return and writes artifacts") {
    CliResult r = run_cli("solve \"" + fixture_path("two-state-coupled.rmdp.json") +
                          "\" --out-value cli-value.json --out-policy cli-policy.json");
    CHECK(r.status == 0);
    CHECK(contains(r.output, "robust_return 0.000000"));

    auto value = nlohmann::json::parse(slurp("cli-value.json"));
    REQUIRE(value.at("value").is_array());
    CHECK(value.at("value").size() == 2);
    CHECK(std::abs(value.at("value")[0].get<double>()) < 1e-9);
    auto policy = nlohmann::json::parse(slurp("cli-policy.json"));
    REQUIRE(policy.at("policy").is_array());
    CHECK(policy.at("policy").size() == 2);
    CHECK(policy.at("policy")[0].size() == 2);
    std::remove("cli-value.json");
    std::remove("cli-policy.json");
}

TEST_CASE("missing model file fails cleanly") {
    CliResult r = run_cli("solve no-such-model.json");
    CHECK(r.status == 1);
    CHECK(contains(r.output, "error:"));
}

TEST_CASE("non-convergence exits with its own code unless allowed") {
    CliResult strict =
        run_cli("solve \"" + fixture_path("two-state-coupled.rmdp.json") + "\" --max-iters 1");
    CHECK(strict.status == 2);
    CHECK(contains(strict.output, "error:"));

    CliResult loose = run_cli("solve \"" + fixture_path("two-state-coupled.rmdp.json") +
                              "\" --max-iters 1 --allow-nonconverged");
    CHECK(loose.status == 0);
    CHECK(contains(loose.output, "robust_return"));
}

TEST_CASE("refinement reports its stage and writes the report") {
    CliResult r = run_cli("orbe \"" + fixture_path("two-state-coupled.rmdp.json") +
                          "\" --report cli-report.json --out-policy cli-orbe-policy.json");
    CHECK(r.status == 0);
    CHECK(contains(r.output, "stage_reached maxmax-unique"));
    CHECK(contains(r.output, "robust_value 0.000000"));

    auto report = nlohmann::json::parse(slurp("cli-report.json"));
    CHECK(report.at("stage_reached").get<std::string>() == "maxmax-unique");
    REQUIRE(report.at("candidate_counts").is_array());
    CHECK(report.at("candidate_counts")[0].at("stage").get<std::string>() == "maxmin");
    auto policy = nlohmann::json::parse(slurp("cli-orbe-policy.json"));
    // The refined policy plays the doubled jump at state 0.
    CHECK(policy.at("policy")[0][1].get<double>() == doctest::Approx(1.0));
    std::remove("cli-report.json");
    std::remove("cli-orbe-policy.json");
}

TEST_CASE("refinement reports the perturbed segment on the tied triangle") {
    CliResult r = run_cli("orbe \"" + fixture_path("triangle-tied.rmdp.json") +
                          "\" --report cli-triangle-report.json");
    CHECK(r.status == 0);
    CHECK(contains(r.output, "stage_reached deriv-min"));
    auto report = nlohmann::json::parse(slurp("cli-triangle-report.json"));
    REQUIRE(report.contains("interior_condition"));
    CHECK(report.at("interior_condition")[0].get<std::string>() == "perturbed");
    CHECK(report.at("final_set_nonsingleton").get<bool>());
    std::remove("cli-triangle-report.json");
}

TEST_CASE("evaluate scores a fixed policy at both extremes") {
    CliResult worst = run_cli("evaluate \"" + fixture_path("two-state-coupled.rmdp.json") +
                              "\" --policy \"" + fixture_path("always-second.policy.json") +
                              "\" --at worst");
    CHECK(worst.status == 0);
    CHECK(contains(worst.output, "return 0.000000"));

    CliResult best = run_cli("evaluate \"" + fixture_path("two-state-coupled.rmdp.json") +
                             "\" --policy \"" + fixture_path("always-second.policy.json") +
                             "\" --at best");
    CHECK(best.status == 0);
    CHECK(contains(best.output, "return 6.2068"));

    CliResult slower = run_cli("evaluate \"" + fixture_path("two-state-coupled.rmdp.json") +
                               "\" --policy \"" + fixture_path("always-first.policy.json") +
                               "\" --at best");
    CHECK(slower.status == 0);
    CHECK(contains(slower.output, "return 4.5000"));
}

TEST_CASE("gridworld generation is reproducible and evaluable") {
    CliResult g1 = run_cli(
        "gen-gridworld --width 4 --height 3 --obstacles 2 --nu 0.5 --seed 11 --gamma 0.9 "
        "--out cli-grid-a.json");
    CHECK(g1.status == 0);
    CliResult g2 = run_cli(
        "gen-gridworld --width 4 --height 3 --obstacles 2 --nu 0.5 --seed 11 --gamma 0.9 "
        "--out cli-grid-b.json");
    CHECK(g2.status == 0);
    CHECK(slurp("cli-grid-a.json") == slurp("cli-grid-b.json"));

    orbe::Rmdp m = orbe::load_model("cli-grid-a.json");
    CHECK(m.num_states == 12);
    CHECK(m.num_actions == 8);

    // Score the all-first-action policy at the worst case, with the tag
    // fraction printed alongside.
    nlohmann::json pj;
    pj["policy"] = nlohmann::json::array();
    for (int s = 0; s < 12; ++s) {
        std::vector<double> row(8, 0.0);
        row[0] = 1.0;
        pj["policy"].push_back(row);
    }
    std::ofstream("cli-grid-policy.json") << pj.dump(2) << "\n";
    CliResult ev = run_cli("evaluate cli-grid-a.json --policy cli-grid-policy.json --be-fraction");
    CHECK(ev.status == 0);
    CHECK(contains(ev.output, "return "));
    CHECK(contains(ev.output, "be_fraction "));

    std::remove("cli-grid-a.json");
    std::remove("cli-grid-b.json");
    std::remove("cli-grid-policy.json");
}

TEST_CASE("seed environment variable fills in when no flag is given") {
    CliResult via_env = run_cli(
        "gen-gridworld --width 4 --height 3 --obstacles 2 --out cli-grid-env.json",
        "ORBE_RMDP_SEED=11 ");
    CHECK(via_env.status == 0);
    CliResult via_flag = run_cli(
        "gen-gridworld --width 4 --height 3 --obstacles 2 --seed 11 --out cli-grid-flag.json");
    CHECK(via_flag.status == 0);
    CHECK(slurp("cli-grid-env.json") == slurp("cli-grid-flag.json"));
    std::remove("cli-grid-env.json");
    std::remove("cli-grid-flag.json");
}

TEST_CASE("bench writes a parseable matrix") {
    CliResult r = run_cli(
        "bench --sizes 4 --nus 0,1 --seeds 2 --variant imdp --gamma 0.9 --jobs 2 "
        "--out cli-bench.csv");
    CHECK(r.status == 0);
    auto rows = orbe::bench_from_csv(slurp("cli-bench.csv"));
    REQUIRE(rows.size() == 6);
    for (const auto& row : rows) {
        CHECK(row.error.empty());
        CHECK(row.be_bestcase_pct == doctest::Approx(100.0));
    }
    std::remove("cli-bench.csv");
}

TEST_CASE("bad usage is rejected without a crash") {
    CliResult none = run_cli("");
    CHECK(none.status != 0);
    CliResult unknown = run_cli("frobnicate");
    CHECK(unknown.status != 0);
    CliResult badflag = run_cli("solve");
    CHECK(badflag.status != 0);
}
