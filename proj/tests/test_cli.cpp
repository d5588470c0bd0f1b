#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include <sublqg/cli.hpp>

namespace sublqg {
namespace {

using json = nlohmann::json;

const std::string kScenarios = SUBLQG_SCENARIO_DIR;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("sublqg_cli_" + name)).string();
}

TEST(Cli, CheckSumExample) {
    const auto r = run_cli({"check", kScenarios + "/sum_sf.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_TRUE(doc["substitutable"].get<bool>());
    ASSERT_EQ(doc["controllers"].size(), 2u);
    EXPECT_NEAR(doc["controllers"][0]["lambda"][0][1].get<double>(), 1.0, 1e-12);
}

TEST(Cli, CheckReportsNonSubstitutable) {
    const auto r = run_cli({"check", kScenarios + "/not_substitutable.json", "--pretty"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("substitutable: no"), std::string::npos);
}

TEST(Cli, SolveWithController) {
    const auto r = run_cli({"solve", kScenarios + "/sum_of.json", "--controller", "2", "--filter"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_EQ(doc["gains"]["steps"].size(), 5u);
    EXPECT_EQ(doc["filter"]["steps"].size(), 5u);
    EXPECT_EQ(doc["controller"]["steps"].size(), 5u);
    EXPECT_TRUE(doc["controller"]["steps"][0].contains("lambda_K_block"));
}

TEST(Cli, SolveFilterOnStateFeedbackIsDomainError) {
    const auto r = run_cli({"solve", kScenarios + "/sum_sf.json", "--filter"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.err)["error"], "ModeMismatch");
}

TEST(Cli, CompareOnGeneratedModel) {
    const std::string scenario = temp_path("gen.json");
    auto g = run_cli({"generate", "--dx", "3", "--dc", "4", "--w", "2", "--n", "3", "--seed", "7", "--out", scenario});
    ASSERT_EQ(g.code, 0) << g.err;
    const std::string paired = temp_path("paired.csv");
    const auto r = run_cli({"compare", scenario, "--runs", "50", "--seed", "3", "--jobs", "2", "--out", paired});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_TRUE(doc["verdict"]["pathwise_equal"].get<bool>());
    EXPECT_TRUE(doc["verdict"]["exact_equal"].get<bool>());
    EXPECT_EQ(doc["decentralized"]["profile"], "decentralized-of");
    std::istringstream csv(io::read_file(paired));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 51u);
    std::remove(scenario.c_str());
    std::remove(paired.c_str());
}

TEST(Cli, CompareRefusesNonSubstitutable) {
    const auto r = run_cli({"compare", kScenarios + "/not_substitutable.json", "--runs", "10"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.err)["error"], "NotSubstitutable");
    EXPECT_EQ(json::parse(r.out)["refusal"], "NotSubstitutable");
}

TEST(Cli, SimulateWritesTraceAndSummary) {
    const std::string trace = temp_path("trace.csv");
    const auto r = run_cli({"simulate", kScenarios + "/sum_of.json", "--profile", "decentralized-of", "--runs", "4",
                            "--seed", "9", "--out", trace});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = json::parse(io::read_file(trace + ".summary.json"));
    EXPECT_EQ(summary["runs"], 4);
    EXPECT_EQ(summary["profile"], "decentralized-of");
    EXPECT_EQ(io::read_file(trace).rfind("t,run,kind,index,value\n", 0), 0u);
    std::remove(trace.c_str());
    std::remove((trace + ".summary.json").c_str());
}

TEST(Cli, SimulateDeterministic) {
    const std::vector<std::string> args = {"simulate", kScenarios + "/sum_sf.json", "--runs", "5", "--seed", "2"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    // The scenario's first profile is used when --profile is absent.
    EXPECT_EQ(json::parse(a.out)["profile"], "centralized-sf");
}

TEST(Cli, SimulateProfileModeMismatch) {
    const auto r = run_cli({"simulate", kScenarios + "/sum_sf.json", "--profile", "decentralized-of"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.err)["error"], "ModeMismatch");
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run_cli({"simulate", temp_path("missing.json")}).code, 2);
    EXPECT_EQ(run_cli({"simulate", kScenarios + "/sum_sf.json", "--profile", "best"}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"generate", "--dx", "3"}).code, 2);
    const auto r = run_cli({"compare", kScenarios + "/sum_sf.json", "--runs", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(json::parse(r.err)["error"], "UsageError");
}

TEST(Cli, HelpListsFlags) {
    const auto top = run_cli({"--help"});
    EXPECT_EQ(top.code, 0);
    for (const char* s : {"check", "solve", "simulate", "compare", "generate"}) {
        EXPECT_NE(top.out.find(s), std::string::npos) << s;
    }
    const auto sim = run_cli({"simulate", "--help"});
    EXPECT_EQ(sim.code, 0);
    for (const char* s : {"--profile", "--seed", "--runs", "--out", "--jobs", "--pretty"}) {
        EXPECT_NE(sim.out.find(s), std::string::npos) << s;
    }
}

TEST(Cli, GenerateToStdoutIsLoadable) {
    const auto r = run_cli({"generate", "--dx", "2", "--dc", "3", "--w", "1", "--n", "2", "--obs", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto cfg = io::parse_scenario(r.out);
    EXPECT_EQ(cfg.model.mode(), Mode::StateFeedback);
    EXPECT_EQ(cfg.model.n, 2);
}

}  // namespace
}  // namespace sublqg
