// Scenario runner for the telemetry pipeline simulator: single runs,
// parameter sweeps, and the bundled scenario library.
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tca/names.hpp"
#include "tca/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitExpectationFailed = 2;

std::string default_out_dir() {
  const char* env = std::getenv("TCA_OUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("out");
}

int load_or_fail(const std::string& path, tca::Scenario& scenario,
                 const std::vector<std::string>& overrides) {
  tca::ScenarioParseResult parsed = tca::load_scenario_file(path);
  if (!parsed.ok()) {
    std::cerr << "error: " << path;
    if (parsed.error->line > 0) std::cerr << ":" << parsed.error->line;
    std::cerr << ": " << parsed.error->message << "\n";
    return kExitConfigError;
  }
  scenario = std::move(*parsed.scenario);
  for (const std::string& item : overrides) {
    size_t eq = item.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got '" << item << "'\n";
      return kExitConfigError;
    }
    auto err = tca::apply_override(scenario, item.substr(0, eq), item.substr(eq + 1));
    if (err.has_value()) {
      std::cerr << "error: " << *err << "\n";
      return kExitConfigError;
    }
  }
  if (!scenario.config.valid()) {
    std::cerr << "error: pipeline caps must be positive\n";
    return kExitConfigError;
  }
  return kExitOk;
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides,
            const std::string& out_dir) {
  tca::Scenario scenario;
  int rc = load_or_fail(path, scenario, overrides);
  if (rc != kExitOk) return rc;

  try {
    tca::ScenarioRunOutcome outcome = tca::run_scenario(scenario, out_dir);
    std::cout << tca::human_table_header() << "\n";
    std::cout << tca::human_table_row(scenario.name, outcome.report) << "\n";
    std::cout << "report: " << outcome.report_path.string() << "\n";
    if (!outcome.failures.empty()) {
      for (const auto& f : outcome.failures) {
        std::cerr << "expectation failed: " << f.field << " expected " << f.expected << ", got "
                  << f.actual << "\n";
      }
      return kExitExpectationFailed;
    }
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_sweep(const std::string& path, const std::string& parameter, const std::string& values_csv,
              const std::vector<std::string>& overrides, const std::string& out_dir) {
  tca::Scenario scenario;
  int rc = load_or_fail(path, scenario, overrides);
  if (rc != kExitOk) return rc;

  std::vector<std::string> values;
  std::stringstream ss(values_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(item);
  }

  try {
    tca::SweepOutcome outcome = tca::sweep(scenario, parameter, values, out_dir);
    std::cout << "sweep " << scenario.name << " over " << parameter << "\n";
    std::cout << "value        completeness  integrity               verdict    stability\n";
    for (const auto& row : outcome.rows) {
      std::ostringstream line;
      line.setf(std::ios::left);
      line.width(13);
      line << row.value;
      std::ostringstream comp;
      comp << row.metrics.behavioral_completeness;
      line.width(14);
      line << comp.str();
      line.width(24);
      line << tca::to_string(row.metrics.report_integrity);
      line.width(11);
      line << tca::to_string(row.metrics.verdict);
      line << (row.metrics.stability.ok ? "ok" : tca::to_string(row.metrics.stability.failed_stage));
      std::cout << line.str() << "\n";
    }
    if (outcome.threshold.has_value()) {
      std::cout << "threshold: first degraded value = " << *outcome.threshold << "\n";
    } else {
      std::cout << "threshold: none within swept range\n";
    }
    std::cout << "summary: " << outcome.summary_path.string() << "\n";
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_list(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    std::cerr << "error: no such scenario directory: " << dir << "\n";
    return kExitConfigError;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".scn") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    tca::ScenarioParseResult parsed = tca::load_scenario_file(file);
    if (parsed.ok()) {
      std::cout << parsed.scenario->name << "\t" << file.string() << "\n";
    } else {
      std::cout << "(parse error: " << parsed.error->message << ")\t" << file.string() << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"telemetry pipeline stress simulator"};
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();
  std::string scenario_path;
  std::vector<std::string> overrides;

  CLI::App* run_cmd = app.add_subcommand("run", "run one scenario and write its run report");
  run_cmd->add_option("scenario", scenario_path, "scenario file (.scn)")->required();
  run_cmd->add_option("--set", overrides, "override a field, e.g. workload.max_depth=120");
  run_cmd->add_option("--out-dir", out_dir, "run-report output directory (env TCA_OUT_DIR)");

  std::string parameter;
  std::string values_csv;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "rerun a scenario across parameter values");
  sweep_cmd->add_option("scenario", scenario_path, "scenario file (.scn)")->required();
  sweep_cmd->add_option("--param", parameter, "numeric field, e.g. workload.max_depth")->required();
  sweep_cmd->add_option("--values", values_csv, "comma-separated values")->required();
  sweep_cmd->add_option("--set", overrides, "override a field before sweeping");
  sweep_cmd->add_option("--out-dir", out_dir, "run-report output directory (env TCA_OUT_DIR)");

  std::string scenario_dir = "scenarios";
  CLI::App* list_cmd = app.add_subcommand("list-scenarios", "list bundled scenarios");
  list_cmd->add_option("--dir", scenario_dir, "scenario directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  if (run_cmd->parsed()) return cmd_run(scenario_path, overrides, out_dir);
  if (sweep_cmd->parsed()) return cmd_sweep(scenario_path, parameter, values_csv, overrides, out_dir);
  return cmd_list(scenario_dir);
}
