#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tca/pipeline.hpp"

namespace tca {

/// Regression assertions a scenario may pin on its metrics.
struct ExpectedOutcome {
  std::optional<double> completeness;       // exact match
  std::optional<double> completeness_max;   // inclusive upper bound
  std::optional<double> completeness_min;   // inclusive lower bound
  std::optional<Verdict> verdict;
  std::optional<ReportIntegrity> report_integrity;
  /// "ok" or the name of the stage expected to fail.
  std::optional<std::string> stability;

  bool empty() const {
    return !completeness && !completeness_max && !completeness_min && !verdict &&
           !report_integrity && !stability;
  }
};

struct Scenario {
  std::string name;
  WorkloadSpec workload;
  PipelineConfig config;
  ExpectedOutcome expect;
};

struct ScenarioError {
  size_t line = 0;  // 0 when not tied to a line
  std::string message;
};

struct ScenarioParseResult {
  std::optional<Scenario> scenario;
  std::optional<ScenarioError> error;

  bool ok() const { return scenario.has_value(); }
};

/// Line-oriented `key = value` format with [section] headers; sections are
/// scenario, workload, pipeline and expect. '#' and ';' start comment
/// lines. Unknown sections or keys are errors carrying the line number.
ScenarioParseResult parse_scenario_text(const std::string& text);
ScenarioParseResult load_scenario_file(const std::filesystem::path& path);

/// Applies one "section.key=value" override (e.g. workload.max_depth=10,
/// pipeline.store.max_doc_depth=50). Returns an error message on failure.
std::optional<std::string> apply_override(Scenario& scenario, const std::string& key,
                                          const std::string& value);

struct ExpectationFailure {
  std::string field;
  std::string expected;
  std::string actual;
};

std::vector<ExpectationFailure> check_expectations(const ExpectedOutcome& expect,
                                                   const RunReport& report);

/// Table-2-style status label derived from the metrics.
std::string behavior_status(const RunMetrics& metrics);

/// One row per run: name, duration, events, logged, report bytes, errors,
/// status. Prefixed by a header when header = true.
std::string human_table_row(const std::string& name, const RunReport& report);
std::string human_table_header();

struct ScenarioRunOutcome {
  int exit_code = 0;  // 0 pass, 2 expectation failure
  RunReport report;
  std::vector<ExpectationFailure> failures;
  std::filesystem::path report_path;
};

/// Runs the scenario, writes <out_dir>/<name>.report.json, evaluates the
/// expectations. Throws std::invalid_argument for infeasible specs.
ScenarioRunOutcome run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

struct SweepRow {
  std::string value;
  RunMetrics metrics;
  bool stalled = false;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;
  /// First swept value whose run degrades (integrity not intact or a stage
  /// failure); unset when none does.
  std::optional<std::string> threshold;
  std::filesystem::path summary_path;
};

/// Reruns the scenario once per value of the given parameter, writes one
/// run-report per value plus a sweep summary file.
SweepOutcome sweep(const Scenario& scenario, const std::string& parameter,
                   const std::vector<std::string>& values, const std::filesystem::path& out_dir);

}  // namespace tca
