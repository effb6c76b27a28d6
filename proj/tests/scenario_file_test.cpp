#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "expertcmp/scenario_run.hpp"

using namespace expertcmp;

namespace {

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string preset(const std::string& name) { return read(std::filesystem::path(EXPERTCMP_PRESET_DIR) / (name + ".scenario")); }

const char* small = R"(name: small
params:
  p: 0.3
experts:
  f0: 'iid(p)'
  f1: 'iid(0.7)'
run:
  horizon: 50
  trials: 40
  seed: 9
tests:
  - kind: derivative
    lambda: ln(100)
    burn_in: 10
  - kind: cross_calibration
    intervals: 5
    min_count: 5
    slack: 0
)";

std::string error_of(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    load_scenario_text(text, ov);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ScenarioFile, AllPresetsLoad) {
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(EXPERTCMP_PRESET_DIR)) {
    if (entry.path().extension() != ".scenario") continue;
    const auto f = load_scenario_text(read(entry.path()));
    EXPECT_EQ(f.name + ".scenario", entry.path().filename().string());
    EXPECT_FALSE(f.tests.empty());
    ++n;
  }
  EXPECT_EQ(n, 7u);
}

TEST(ScenarioFile, ParsesFields) {
  const auto f = load_scenario_text(small);
  EXPECT_EQ(f.horizon, 50u);
  EXPECT_EQ(f.trials, 40u);
  EXPECT_EQ(f.seed, 9u);
  EXPECT_EQ(f.natures, std::vector<std::string>{"expert0"});
  ASSERT_EQ(f.tests.size(), 2u);
  EXPECT_DOUBLE_EQ(f.tests[0].lambda, std::log(100.0));
  EXPECT_EQ(f.tests[1].crosscal.min_count, 5u);
  EXPECT_EQ(f.params.at("p"), 0.3);
}

TEST(ScenarioFile, UnknownKeyNamesKeyAndLine) {
  const auto msg = error_of(read(std::filesystem::path(EXPERTCMP_TEST_DATA_DIR) / "unknown_key.scenario"));
  EXPECT_NE(msg.find("trails"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 9"), std::string::npos) << msg;
}

TEST(ScenarioFile, RejectsBadValues) {
  EXPECT_NE(error_of(small, {"trials=0"}), "");
  EXPECT_NE(error_of(small, {"horizon=5"}), "");  // burn_in 10 >= horizon
  EXPECT_NE(error_of(small, {"tests.0.lambda=ln(-1)"}), "");
  EXPECT_NE(error_of(small, {"tests.1.intervals=4"}), "");
  EXPECT_NE(error_of(small, {"f0=iid(1.5)"}), "");
  EXPECT_NE(error_of(small, {"f0=nosuch(1)"}), "");
  EXPECT_NE(error_of(small, {"tests.0.kind=oracle"}), "");
  EXPECT_NE(error_of("[1, 2]"), "");
  EXPECT_NE(error_of("name: x\nrun: {horizon: 10\n"), "");
}

TEST(ScenarioFile, Overrides) {
  auto f = load_scenario_text(small, {"p=0.4", "trials=7", "tests.0.lambda=ln(10)", "output.trace_trial=3"});
  EXPECT_EQ(f.params.at("p"), 0.4);
  EXPECT_EQ(f.trials, 7u);
  EXPECT_DOUBLE_EQ(f.tests[0].lambda, std::log(10.0));
  EXPECT_EQ(f.output.trace_trial, 3u);
  EXPECT_NE(error_of(small, {"nosuchkey=1"}).find("nosuchkey"), std::string::npos);
  EXPECT_NE(error_of(small, {"trials"}), "");
  EXPECT_NE(error_of(small, {"tests.9.lambda=1"}).find("out of range"), std::string::npos);
  const std::string twice = std::string(small) + "output:\n  seed: 1\n";
  EXPECT_NE(error_of(twice, {"seed=2"}).find("ambiguous"), std::string::npos);
}

TEST(ScenarioFile, CanonicalJsonRoundTrip) {
  for (const char* name : {"claim1", "claim2", "exampleB1", "tail-surgery", "ideal-iid"}) {
    const auto f = load_scenario_text(preset(name));
    const auto j = to_json(f);
    const auto g = load_scenario_text(j.dump());
    EXPECT_EQ(to_json(g), j) << name;
  }
  auto f = load_scenario_text(small);
  const auto g = load_scenario_text(to_json(f).dump());
  const auto a = run_scenario(f, 1);
  const auto b = run_scenario(g, 3);
  ASSERT_TRUE(a.natures[0].estimate && b.natures[0].estimate);
  for (std::size_t k = 0; k < f.tests.size(); ++k) {
    EXPECT_EQ(a.natures[0].estimate->tests[k].all.counts, b.natures[0].estimate->tests[k].all.counts);
  }
}

TEST(ScenarioRun, PresetExpectationsClaimTwo) {
  const auto run = run_scenario(load_scenario_text(preset("claim2")));
  EXPECT_FALSE(run.expectations.empty());
  EXPECT_TRUE(all_expectations_met(run));
}

TEST(ScenarioRun, FailedExpectationIsReported) {
  const std::string text = std::string(small) +
                           "expect:\n  - {nature: expert0, test: derivative, quantity: expert1, value: 1, tolerance: 0}\n";
  const auto run = run_scenario(load_scenario_text(text));
  ASSERT_EQ(run.expectations.size(), 1u);
  EXPECT_FALSE(run.expectations[0].pass);
  EXPECT_FALSE(all_expectations_met(run));
}

TEST(ScenarioRun, WritesRequestedOutputs) {
  const auto dir = std::filesystem::temp_directory_path() / "expertcmp_scenario_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string text = std::string(small) + "output:\n  trials_jsonl: false\n  trajectory_csv: false\n  profiles_csv: false\n";
  auto f = load_scenario_text(text, {"trials_jsonl=true", "trajectory_csv=true", "profiles_csv=true"});
  const auto run = run_scenario(f, 1);
  const auto written = write_outputs(run, dir.string());
  EXPECT_EQ(written.size(), 4u);
  for (const char* file : {"report.json", "trials.jsonl", "trajectory.csv", "crosscal_profiles.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / file)) << file;
  }
  const auto report = nlohmann::ordered_json::parse(read(dir / "report.json"));
  EXPECT_EQ(report["scenario"]["name"], "small");
  std::ifstream jl(dir / "trials.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(jl, line);) ++lines;
  EXPECT_EQ(lines, 40u);
  EXPECT_EQ(read(dir / "trajectory.csv").rfind("t,log_ratio", 0), 0u);
  std::filesystem::remove_all(dir);
}
