#include "tca/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tca/names.hpp"
#include "tca/report_io.hpp"

namespace tca {

namespace {

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_u64(const std::string& s, uint64_t& out) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_f64(const std::string& s, double& out) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true") {
    out = true;
    return true;
  }
  if (s == "false") {
    out = false;
    return true;
  }
  return false;
}

bool parse_fan_out(const std::string& s, std::vector<uint32_t>& out) {
  out.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    uint64_t v = 0;
    if (!parse_u64(trim(item), v) || v == 0) return false;
    out.push_back(static_cast<uint32_t>(v));
  }
  return !out.empty();
}

// Setter shared by the file parser, --set overrides and sweeps. Returns an
// error message, or nullopt on success.
std::optional<std::string> set_field(Scenario& sc, const std::string& section,
                                     const std::string& key, const std::string& value) {
  auto bad_value = [&]() -> std::optional<std::string> {
    return "invalid value '" + value + "' for " + section + "." + key;
  };
  auto unknown = [&]() -> std::optional<std::string> {
    return "unknown key '" + key + "' in section [" + section + "]";
  };

  if (section == "scenario") {
    if (key == "name") {
      sc.name = value;
      return std::nullopt;
    }
    return unknown();
  }

  if (section == "workload") {
    WorkloadSpec& w = sc.workload;
    uint64_t u = 0;
    if (key == "max_depth") {
      if (!parse_u64(value, u)) return bad_value();
      w.max_depth = static_cast<uint32_t>(u);
    } else if (key == "fan_out") {
      if (!parse_fan_out(value, w.fan_out)) return bad_value();
    } else if (key == "arg_bytes_per_event") {
      if (!parse_u64(value, w.arg_bytes_per_event)) return bad_value();
    } else if (key == "events_per_second") {
      auto r = Rational::parse(value);
      if (!r.has_value() || r->num <= 0) return bad_value();
      w.events_per_second = *r;
    } else if (key == "total_process_cap") {
      if (!parse_u64(value, w.total_process_cap)) return bad_value();
    } else if (key == "seed") {
      if (!parse_u64(value, w.seed)) return bad_value();
    } else if (key == "terminal_payload") {
      if (!parse_bool(value, w.terminal_payload)) return bad_value();
    } else {
      return unknown();
    }
    return std::nullopt;
  }

  if (section == "pipeline") {
    PipelineConfig& c = sc.config;
    uint64_t u = 0;
    if (key == "queue_capacity") {
      if (!parse_u64(value, u)) return bad_value();
      c.queue_capacity = u;
    } else if (key == "overflow_policy") {
      auto p = parse_overflow_policy(value);
      if (!p.has_value()) return bad_value();
      c.overflow_policy = *p;
    } else if (key == "throttle") {
      if (value == "none") {
        c.throttle.reset();
      } else {
        auto r = Rational::parse(value);
        if (!r.has_value() || r->num <= 0) return bad_value();
        c.throttle = *r;
      }
    } else if (key == "aggregation") {
      auto m = parse_aggregation_mode(value);
      if (!m.has_value()) return bad_value();
      c.aggregation = *m;
    } else if (key == "serializer.max_depth") {
      if (!parse_u64(value, u)) return bad_value();
      c.serializer_limits.max_depth = static_cast<uint32_t>(u);
    } else if (key == "serializer.max_bytes") {
      if (!parse_u64(value, u)) return bad_value();
      c.serializer_limits.max_bytes = u;
    } else if (key == "serializer.breach_policy") {
      auto p = parse_breach_policy(value);
      if (!p.has_value()) return bad_value();
      c.serializer_limits.breach_policy = *p;
    } else if (key == "serializer.recursion_guard") {
      if (!parse_bool(value, c.serializer_limits.recursion_guard)) return bad_value();
    } else if (key == "serializer.encoding") {
      auto k = parse_encoding_kind(value);
      if (!k.has_value()) return bad_value();
      c.serializer_encoding = *k;
    } else if (key == "serializer.streaming") {
      if (!parse_bool(value, c.serializer_streaming)) return bad_value();
    } else if (key == "serializer.window_bytes") {
      if (!parse_u64(value, c.serializer_window_bytes)) return bad_value();
    } else if (key == "store.mode") {
      auto m = parse_store_mode(value);
      if (!m.has_value()) return bad_value();
      c.store_limits.mode = *m;
    } else if (key == "store.max_doc_bytes") {
      if (!parse_u64(value, c.store_limits.max_doc_bytes)) return bad_value();
    } else if (key == "store.max_doc_depth") {
      if (!parse_u64(value, u)) return bad_value();
      c.store_limits.max_doc_depth = static_cast<uint32_t>(u);
    } else if (key == "store.max_total_bytes") {
      if (value == "none") {
        c.store_limits.max_total_bytes.reset();
      } else {
        if (!parse_u64(value, u)) return bad_value();
        c.store_limits.max_total_bytes = u;
      }
    } else if (key == "append_drop_when_behind") {
      if (!parse_bool(value, c.append_drop_when_behind)) return bad_value();
    } else if (key == "forensic_capture") {
      if (!parse_bool(value, c.forensic_capture)) return bad_value();
    } else if (key == "transport_max_bytes") {
      if (!parse_u64(value, c.transport_max_bytes)) return bad_value();
    } else if (key == "renderer_node_budget") {
      if (!parse_u64(value, c.renderer_node_budget)) return bad_value();
    } else if (key == "renderer_lazy") {
      if (!parse_bool(value, c.renderer_lazy)) return bad_value();
    } else if (key == "tree_entry_limit") {
      if (value == "none") {
        c.tree_entry_limit.reset();
      } else {
        if (!parse_u64(value, u)) return bad_value();
        c.tree_entry_limit = u;
      }
    } else {
      return unknown();
    }
    return std::nullopt;
  }

  if (section == "expect") {
    ExpectedOutcome& e = sc.expect;
    double d = 0;
    if (key == "completeness") {
      if (!parse_f64(value, d)) return bad_value();
      e.completeness = d;
    } else if (key == "completeness_min") {
      if (!parse_f64(value, d)) return bad_value();
      e.completeness_min = d;
    } else if (key == "completeness_max") {
      if (!parse_f64(value, d)) return bad_value();
      e.completeness_max = d;
    } else if (key == "verdict") {
      auto v = parse_verdict(value);
      if (!v.has_value()) return bad_value();
      e.verdict = *v;
    } else if (key == "report_integrity") {
      auto ri = parse_report_integrity(value);
      if (!ri.has_value()) return bad_value();
      e.report_integrity = *ri;
    } else if (key == "stability") {
      if (value != "ok" && value != "collector" && value != "aggregator" &&
          value != "serializer" && value != "store" && value != "transport" &&
          value != "renderer") {
        return bad_value();
      }
      e.stability = value;
    } else {
      return unknown();
    }
    return std::nullopt;
  }

  return "unknown section [" + section + "]";
}

}  // namespace

ScenarioParseResult parse_scenario_text(const std::string& text) {
  Scenario scenario;
  std::string section;
  std::stringstream ss(text);
  std::string raw;
  size_t line_no = 0;
  auto fail = [&](const std::string& message) {
    return ScenarioParseResult{std::nullopt, ScenarioError{line_no, message}};
  };

  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') return fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "workload" && section != "pipeline" &&
          section != "expect") {
        return fail("unknown section [" + section + "]");
      }
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) return fail("expected key = value");
    if (section.empty()) return fail("key outside of any section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) return fail("empty key");
    if (auto err = set_field(scenario, section, key, value)) return fail(*err);
  }
  if (scenario.name.empty()) {
    line_no = 0;
    return fail("missing [scenario] name");
  }
  if (!scenario.config.valid()) {
    line_no = 0;
    return fail("pipeline caps must be positive");
  }
  return {std::move(scenario), std::nullopt};
}

ScenarioParseResult load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return {std::nullopt, ScenarioError{0, "cannot open scenario file: " + path.string()}};
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

std::optional<std::string> apply_override(Scenario& scenario, const std::string& key,
                                          const std::string& value) {
  size_t dot = key.find('.');
  if (dot == std::string::npos) return "override key must be section.key: " + key;
  std::string section = key.substr(0, dot);
  std::string rest = key.substr(dot + 1);
  return set_field(scenario, section, rest, value);
}

std::vector<ExpectationFailure> check_expectations(const ExpectedOutcome& expect,
                                                   const RunReport& report) {
  std::vector<ExpectationFailure> failures;
  const RunMetrics& m = report.metrics;
  auto fail = [&](const std::string& field, const std::string& want, const std::string& got) {
    failures.push_back({field, want, got});
  };
  auto fmt = [](double d) {
    std::ostringstream os;
    os << d;
    return os.str();
  };

  if (expect.completeness && m.behavioral_completeness != *expect.completeness) {
    fail("completeness", fmt(*expect.completeness), fmt(m.behavioral_completeness));
  }
  if (expect.completeness_min && m.behavioral_completeness < *expect.completeness_min) {
    fail("completeness_min", fmt(*expect.completeness_min), fmt(m.behavioral_completeness));
  }
  if (expect.completeness_max && m.behavioral_completeness > *expect.completeness_max) {
    fail("completeness_max", fmt(*expect.completeness_max), fmt(m.behavioral_completeness));
  }
  if (expect.verdict && m.verdict != *expect.verdict) {
    fail("verdict", to_string(*expect.verdict), to_string(m.verdict));
  }
  if (expect.report_integrity && m.report_integrity != *expect.report_integrity) {
    fail("report_integrity", to_string(*expect.report_integrity), to_string(m.report_integrity));
  }
  if (expect.stability) {
    std::string actual = m.stability.ok ? "ok" : to_string(m.stability.failed_stage);
    if (actual != *expect.stability) fail("stability", *expect.stability, actual);
  }
  return failures;
}

std::string behavior_status(const RunMetrics& m) {
  if (!m.stability.ok && m.stability.failed_stage == Stage::Serializer) return "failed reporting";
  if (m.report_integrity == ReportIntegrity::Missing) return "no behavior";
  if (!m.stability.ok && (m.stability.failed_stage == Stage::Transport ||
                          m.stability.failed_stage == Stage::Renderer)) {
    return "view broken";
  }
  if (m.behavioral_completeness == 1.0) return "behavior ok";
  return "partial behavior";
}

namespace {

std::string fixed3(double v) {
  // three decimals, deterministic
  int64_t scaled = static_cast<int64_t>(v * 1000.0 + 0.5);
  std::string whole = std::to_string(scaled / 1000);
  std::string frac = std::to_string(scaled % 1000);
  while (frac.size() < 3) frac.insert(frac.begin(), '0');
  return whole + "." + frac;
}

std::string pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

uint64_t total_errors(const StageTrace& t) {
  uint64_t n = 0;
  for (Stage s : {Stage::Collector, Stage::Aggregator, Stage::Serializer, Stage::Store,
                  Stage::Transport, Stage::Renderer}) {
    n += t.stage(s).errors.size();
  }
  return n;
}

std::string first_error(const StageTrace& t) {
  for (Stage s : {Stage::Collector, Stage::Aggregator, Stage::Serializer, Stage::Store,
                  Stage::Transport, Stage::Renderer}) {
    if (!t.stage(s).errors.empty()) {
      return to_string(s) + ": " + t.stage(s).errors.front();
    }
  }
  return "-";
}

}  // namespace

std::string human_table_header() {
  return pad("scenario", 28) + pad("duration(s)", 13) + pad("events", 9) + pad("logged", 9) +
         pad("report(B)", 11) + pad("errors", 8) + "status";
}

std::string human_table_row(const std::string& name, const RunReport& report) {
  const RunMetrics& m = report.metrics;
  return pad(name, 28) + pad(fixed3(report.sim_duration.to_double()), 13) +
         pad(std::to_string(m.ground_truth_events), 9) +
         pad(std::to_string(m.recovered_events), 9) +
         pad(std::to_string(report.report_bytes), 11) +
         pad(std::to_string(total_errors(report.trace)), 8) + behavior_status(m);
}

namespace {

std::string safe_filename(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return out;
}

}  // namespace

ScenarioRunOutcome run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir) {
  ScenarioRunOutcome outcome;
  outcome.report = run(scenario.workload, scenario.config);
  outcome.failures = check_expectations(scenario.expect, outcome.report);
  outcome.exit_code = outcome.failures.empty() ? 0 : 2;

  std::filesystem::create_directories(out_dir);
  outcome.report_path = out_dir / (safe_filename(scenario.name) + ".report.json");
  std::vector<uint8_t> bytes = run_report_bytes(outcome.report, scenario.name);
  std::ofstream out(outcome.report_path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  return outcome;
}

SweepOutcome sweep(const Scenario& scenario, const std::string& parameter,
                   const std::vector<std::string>& values, const std::filesystem::path& out_dir) {
  SweepOutcome outcome;
  std::filesystem::create_directories(out_dir);

  DocValue::Array rows;
  for (const std::string& value : values) {
    Scenario variant = scenario;
    variant.name = scenario.name + ".sweep." + parameter + "." + value;
    if (auto err = apply_override(variant, parameter, value)) {
      throw std::invalid_argument(*err);
    }
    ScenarioRunOutcome run_outcome = run_scenario(variant, out_dir);
    const RunMetrics& m = run_outcome.report.metrics;
    bool degraded = m.report_integrity != ReportIntegrity::Intact || !m.stability.ok;
    if (degraded && !outcome.threshold.has_value()) outcome.threshold = value;
    outcome.rows.push_back({value, m, run_outcome.report.render.stalled});
    rows.push_back(mapv({
        {"value", DocValue::str(value)},
        {"completeness", DocValue::real(m.behavioral_completeness)},
        {"report_integrity", DocValue::str(to_string(m.report_integrity))},
        {"verdict", DocValue::str(to_string(m.verdict))},
        {"stability", DocValue::str(m.stability.ok ? "ok" : to_string(m.stability.failed_stage))},
        {"stalled", DocValue::boolean(run_outcome.report.render.stalled)},
    }));
  }

  DocValue summary = mapv({
      {"scenario", DocValue::str(scenario.name)},
      {"parameter", DocValue::str(parameter)},
      {"rows", DocValue::array(std::move(rows))},
      {"threshold", outcome.threshold.has_value() ? DocValue::str(*outcome.threshold)
                                                  : DocValue::null()},
  });
  outcome.summary_path =
      out_dir / (safe_filename(scenario.name + ".sweep." + parameter) + ".json");
  std::vector<uint8_t> bytes = encode_unchecked(summary, EncodingKind::Text);
  bytes.push_back('\n');
  std::ofstream out(outcome.summary_path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  return outcome;
}

}  // namespace tca
