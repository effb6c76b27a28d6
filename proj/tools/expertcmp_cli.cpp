// expertcmp: run comparison-test scenarios and list the bundled presets.
//
//   expertcmp run <file | preset:NAME> [--set k=v]... [--workers K] [--out DIR] [--check]
//   expertcmp list-presets

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expertcmp/presets_embedded.hpp"
#include "expertcmp/scenario_run.hpp"

namespace {

using namespace expertcmp;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scenario_text(const std::string& source) {
  if (source.rfind("preset:", 0) == 0) {
    const std::string want = source.substr(7) + ".scenario";
    for (const auto& p : presets::embedded) {
      if (p.file == want) return std::string(p.text);
    }
    throw ScenarioError("no preset named '" + source.substr(7) + "'");
  }
  return read_file(source);
}

int list_presets() {
  std::vector<ScenarioFile> all;
  for (const auto& p : presets::embedded) all.push_back(load_scenario_text(std::string(p.text)));
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  std::size_t width = 0;
  for (const auto& f : all) width = std::max(width, f.name.size());
  for (const auto& f : all) {
    std::cout << f.name << std::string(width - f.name.size() + 2, ' ') << "[" << f.reproduces << "] "
              << f.description << '\n';
  }
  return 0;
}

int run(const std::string& source, const std::vector<std::string>& overrides, unsigned workers,
        const std::string& out_dir, bool check) {
  const ScenarioFile file = load_scenario_text(scenario_text(source), overrides);
  const ScenarioRun result = run_scenario(file, workers);
  print_summary(std::cout, result);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  for (const auto& path : write_outputs(result, out_dir)) std::cout << "wrote " << path << '\n';
  if (check && !all_expectations_met(result)) {
    std::cerr << "expertcmp: expectations not met\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo harness for comparison tests between two forecasting experts"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run a scenario file (or preset:NAME) and write report.json");
  std::string source;
  std::vector<std::string> overrides;
  unsigned workers = 0;
  std::string out_dir = ".";
  bool check = false;
  run_cmd->add_option("scenario", source, "Scenario file path, or preset:NAME")->required();
  run_cmd->add_option("--set", overrides, "Override a setting, key=value (repeatable)")->allow_extra_args(false);
  run_cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_flag("--check", check, "Exit with status 3 if an expectation is not met");

  app.add_subcommand("list-presets", "List bundled scenario presets");

  CLI11_PARSE(app, argc, argv);
  try {
    if (app.got_subcommand("list-presets")) return list_presets();
    return run(source, overrides, workers, out_dir, check);
  } catch (const ScenarioError& e) {
    std::cerr << "expertcmp: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "expertcmp: error: " << e.what() << '\n';
    return 1;
  }
}
