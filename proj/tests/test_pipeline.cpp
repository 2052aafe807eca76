#include "tca/pipeline.hpp"

#include "doctest.h"
#include "support/random_docs.hpp"

using namespace tca;
using namespace tca::testing;

namespace {

WorkloadSpec chain_spec(uint32_t depth, bool payload = true) {
  WorkloadSpec spec;
  spec.max_depth = depth;
  spec.terminal_payload = payload;
  spec.seed = 11;
  return spec;
}

// Store caps at their defaults, serializer bounded only by a deep recursion
// guard: failures surface at the database, like a stock deployment.
PipelineConfig naive_config() {
  PipelineConfig config;
  config.serializer_limits.max_depth = 1000;
  config.serializer_limits.max_bytes = 1ULL << 30;
  config.serializer_limits.recursion_guard = true;
  return config;
}

PipelineConfig hardened_config() {
  PipelineConfig config;
  config.overflow_policy = OverflowPolicy::Backpressure;
  config.aggregation = AggregationMode::CollapseRepeats;
  config.serializer_limits.max_depth = 1000;
  config.serializer_limits.max_bytes = 1ULL << 30;
  config.serializer_streaming = true;
  config.store_limits.mode = StoreMode::ChunkedRecords;
  config.forensic_capture = true;
  config.renderer_lazy = true;
  return config;
}

ProcessEvent make_event(uint64_t id, std::optional<uint64_t> parent, uint32_t gen,
                        std::vector<std::string> args = {}, bool payload = false) {
  ProcessEvent e;
  e.event_id = id;
  e.parent_id = parent;
  e.generation = gen;
  e.timestamp = 1761675797;
  e.args = std::move(args);
  e.is_terminal_payload = payload;
  return e;
}

}  // namespace

TEST_CASE("naive config loses a depth-200 chain at the store") {
  RunReport report = run(chain_spec(200), naive_config());
  CHECK(report.metrics.report_integrity == ReportIntegrity::Missing);
  CHECK(report.metrics.behavioral_completeness == 0.0);
  CHECK(report.metrics.verdict == Verdict::Benign);
  REQUIRE_FALSE(report.metrics.stability.ok);
  CHECK(report.metrics.stability.failed_stage == Stage::Store);
  CHECK(report.metrics.stability.reason.find("DepthCap") != std::string::npos);
  CHECK(report.forensic_artifacts == 0);  // naive config keeps no forensic store
  CHECK(report.trace.serializer.admitted == 1);  // the encoder itself coped
  CHECK(report.trace.transport.offered == 0);
}

TEST_CASE("hardened config keeps the same workload fully visible") {
  RunReport report = run(chain_spec(200), hardened_config());
  CHECK(report.metrics.behavioral_completeness == 1.0);
  CHECK(report.metrics.verdict == Verdict::Malicious);
  CHECK(report.metrics.stability.ok);
  CHECK(report.metrics.report_integrity == ReportIntegrity::Intact);
  CHECK(report.trace.store.admitted == 201);
}

TEST_CASE("empty workload is trivially intact") {
  WorkloadSpec spec;  // single root, no payload
  RunReport report = run(spec, naive_config());
  CHECK(report.metrics.behavioral_completeness == 1.0);
  CHECK(report.metrics.report_integrity == ReportIntegrity::Intact);
  CHECK(report.metrics.stability.ok);
  CHECK(report.metrics.verdict == Verdict::Benign);
}

TEST_CASE("aggregation collapses 100 identical siblings into one summary") {
  std::vector<ProcessEvent> events;
  events.push_back(make_event(0, std::nullopt, 0));
  for (uint64_t i = 1; i <= 100; ++i) {
    events.push_back(make_event(i, 0, 1, {"spawn"}));
  }
  std::vector<PipelineEvent> out = aggregate_collapse_repeats(events);
  REQUIRE(out.size() == 2);
  CHECK(std::holds_alternative<ProcessEvent>(out[0]));
  const auto& summary = std::get<SpawnSummary>(out[1]);
  CHECK(summary.count == 100);
  CHECK(summary.first_id == 1);
  CHECK(summary.last_id == 100);
  CHECK(summary.parent_id == 0);
}

TEST_CASE("aggregation leaves singleton sequences untouched") {
  std::vector<ProcessEvent> one{make_event(0, std::nullopt, 0)};
  CHECK(aggregate_collapse_repeats(one).size() == 1);
}

TEST_CASE("aggregation skips chains whose args differ at every generation") {
  std::vector<ProcessEvent> events;
  events.push_back(make_event(0, std::nullopt, 0, {"a0"}));
  for (uint64_t i = 1; i < 10; ++i) {
    events.push_back(make_event(i, i - 1, static_cast<uint32_t>(i), {"a" + std::to_string(i)}));
  }
  std::vector<PipelineEvent> out = aggregate_collapse_repeats(events);
  CHECK(out.size() == 10);
  for (const auto& pe : out) CHECK(std::holds_alternative<ProcessEvent>(pe));
}

TEST_CASE("payload events are never aggregated away") {
  std::vector<ProcessEvent> events;
  events.push_back(make_event(0, std::nullopt, 0));
  for (uint64_t i = 1; i <= 10; ++i) {
    events.push_back(make_event(i, 0, 1, {"x"}, /*payload=*/i == 5));
  }
  std::vector<PipelineEvent> out = aggregate_collapse_repeats(events);
  bool payload_seen = false;
  uint64_t covered = 0;
  for (const auto& pe : out) {
    if (const auto* e = std::get_if<ProcessEvent>(&pe)) {
      payload_seen = payload_seen || e->is_terminal_payload;
      ++covered;
    } else {
      covered += std::get<SpawnSummary>(pe).count;
    }
  }
  CHECK(payload_seen);
  CHECK(covered == 11);
}

TEST_CASE("transport failure preserves both byte figures") {
  TransportResult failed = transport_send(8732115, 4194304);
  CHECK_FALSE(failed.ok);
  CHECK(failed.message() == "received message larger than max (8732115 vs. 4194304)");

  CHECK(transport_send(4194304, 4194304).ok);  // boundary inclusive
  CHECK(transport_send(uint64_t{0}, 4194304).ok);
}

TEST_CASE("renderer law") {
  RenderOutcome fits = render(5000, 10000, false);
  CHECK_FALSE(fits.stalled);
  CHECK(fits.rendered_nodes == 5000);

  RenderOutcome stalled = render(20001, 10000, false);
  CHECK(stalled.stalled);
  CHECK(stalled.rendered_nodes == 10000);  // nothing rendered past the budget

  RenderOutcome lazy = render(20001, 10000, true);
  CHECK_FALSE(lazy.stalled);
  CHECK(lazy.pages == 3);
  CHECK(lazy.rendered_nodes == 20001);

  RenderOutcome empty = render(0, 10000, true);
  CHECK(empty.pages == 0);
}

TEST_CASE("lazy rendering covers every node across a size sweep") {
  for (uint64_t nodes : {1ULL, 9999ULL, 10000ULL, 10001ULL, 25000ULL, 100000ULL}) {
    RenderOutcome lazy = render(nodes, 10000, true);
    CHECK_FALSE(lazy.stalled);
    CHECK(lazy.rendered_nodes == nodes);
    CHECK(lazy.pages == (nodes + 9999) / 10000);
    RenderOutcome eager = render(nodes, 10000, false);
    CHECK(eager.stalled == (nodes > 10000));
  }
}

TEST_CASE("denial-of-analysis depth threshold sits at workload depth 49") {
  // chain of k processes nests to 2k+1; the wrapper crosses 100 levels at
  // k = 50, i.e. workload depth 49
  for (uint32_t depth : {10u, 30u, 48u}) {
    RunReport report = run(chain_spec(depth), naive_config());
    CHECK(report.metrics.behavioral_completeness == 1.0);
    CHECK(report.metrics.report_integrity == ReportIntegrity::Intact);
  }
  for (uint32_t depth : {49u, 50u, 120u}) {
    RunReport report = run(chain_spec(depth), naive_config());
    CHECK(report.metrics.report_integrity == ReportIntegrity::Missing);
    CHECK(report.metrics.behavioral_completeness == 0.0);
  }
}

TEST_CASE("stage conservation holds on randomized workloads") {
  Rng rng(0xC0);
  for (int i = 0; i < 20; ++i) {
    WorkloadSpec spec;
    spec.max_depth = 2 + static_cast<uint32_t>(rng.below(5));
    spec.fan_out = {1 + static_cast<uint32_t>(rng.below(4))};
    spec.terminal_payload = rng.chance(70);
    spec.arg_bytes_per_event = rng.below(64);
    spec.seed = rng.next();
    if (!generate(spec).ok()) continue;

    PipelineConfig config = rng.chance(50) ? hardened_config() : naive_config();
    if (rng.chance(40)) {
      config.throttle = Rational::of(50);
      config.queue_capacity = 1 + rng.below(8);
    }
    RunReport report = run(spec, config);
    const StageTrace& t = report.trace;
    CHECK(t.collector.offered == t.collector.admitted + t.collector.dropped);
    CHECK(t.aggregator.offered == t.aggregator.admitted + t.aggregator.aggregated);
    CHECK(t.serializer.offered == t.serializer.admitted + t.serializer.rejected);
    CHECK(t.store.offered == t.store.admitted + t.store.rejected + t.store.dropped);
    CHECK(t.renderer.offered == t.renderer.admitted + t.renderer.dropped);
    // completeness cross-check by brute enumeration of the final store
    RecoveryScan scan = scan_recoverable(report.stored_documents);
    CHECK(report.metrics.recovered_events ==
          std::min<uint64_t>(scan.recovered_events, report.metrics.ground_truth_events));
  }
}

TEST_CASE("hardened completeness dominates naive completeness") {
  std::vector<WorkloadSpec> workloads;
  workloads.push_back(chain_spec(200));
  workloads.push_back(chain_spec(10));
  WorkloadSpec fan;
  fan.max_depth = 6;
  fan.fan_out = {4};
  fan.terminal_payload = true;
  workloads.push_back(fan);
  for (const auto& spec : workloads) {
    RunReport naive = run(spec, naive_config());
    RunReport hardened = run(spec, hardened_config());
    CHECK(hardened.metrics.behavioral_completeness >= naive.metrics.behavioral_completeness);
    CHECK(hardened.metrics.behavioral_completeness == 1.0);
    CHECK(hardened.metrics.verdict == Verdict::Malicious);
  }
}

TEST_CASE("aggregation never downgrades the verdict") {
  WorkloadSpec fan;
  fan.max_depth = 4;
  fan.fan_out = {5};
  fan.terminal_payload = true;
  PipelineConfig with = hardened_config();
  PipelineConfig without = hardened_config();
  without.aggregation = AggregationMode::Off;
  RunReport a = run(fan, with);
  RunReport b = run(fan, without);
  CHECK(a.metrics.verdict == Verdict::Malicious);
  CHECK(b.metrics.verdict == Verdict::Malicious);
  CHECK(a.metrics.behavioral_completeness == 1.0);
  CHECK(a.trace.aggregator.aggregated > 0);
}

TEST_CASE("throttled collector drops bursts under DropNewest") {
  WorkloadSpec spec = chain_spec(400, true);
  spec.events_per_second = Rational::of(100000);
  PipelineConfig config = hardened_config();
  config.aggregation = AggregationMode::Off;
  config.overflow_policy = OverflowPolicy::DropNewest;
  config.queue_capacity = 16;
  config.throttle = Rational::of(1000);
  RunReport report = run(spec, config);
  CHECK(report.trace.collector.dropped > 0);
  CHECK(report.metrics.overhead.peak_queue_len == 16);
  CHECK(report.metrics.behavioral_completeness < 1.0);
  // dropped events leave no marker, so the loss is silent corruption
  CHECK(report.metrics.report_integrity == ReportIntegrity::Corrupted);
  CHECK(report.metrics.stability.ok);
}

TEST_CASE("back-pressure admits everything and completeness stays full") {
  WorkloadSpec spec = chain_spec(400, true);
  spec.events_per_second = Rational::of(100000);
  PipelineConfig config = hardened_config();
  config.overflow_policy = OverflowPolicy::Backpressure;
  config.queue_capacity = 16;
  config.throttle = Rational::of(1000);
  RunReport report = run(spec, config);
  CHECK(report.trace.collector.dropped == 0);
  CHECK(report.metrics.behavioral_completeness == 1.0);
  CHECK(report.metrics.verdict == Verdict::Malicious);
  CHECK(report.metrics.overhead.peak_queue_len <= 16);
  // producer stalls stretch the run to the full drain schedule: 401 events
  // at 1 ms each, versus a 4 ms emit schedule
  CHECK(report.sim_duration == Rational::of(401, 1000));
}

TEST_CASE("drop-oldest keeps the newest burst instead") {
  WorkloadSpec spec = chain_spec(50, true);
  spec.events_per_second = Rational::of(100000);
  PipelineConfig config = hardened_config();
  config.aggregation = AggregationMode::Off;
  config.overflow_policy = OverflowPolicy::DropOldest;
  config.queue_capacity = 8;
  config.throttle = Rational::of(100);
  RunReport report = run(spec, config);
  CHECK(report.trace.collector.dropped > 0);
  RecoveryScan scan = scan_recoverable(report.stored_documents);
  CHECK(scan.payload_recovered);  // newest events (payload last) survive
}

TEST_CASE("append-log mode loses late lines silently") {
  WorkloadSpec spec;
  spec.max_depth = 5;
  spec.fan_out = {4};
  spec.arg_bytes_per_event = 1500;
  spec.terminal_payload = true;
  PipelineConfig config;
  config.serializer_limits.max_depth = 1000;
  config.store_limits.mode = StoreMode::AppendLog;
  config.store_limits.max_total_bytes = 256 * 1024;
  config.append_drop_when_behind = true;
  RunReport report = run(spec, config);
  CHECK(report.trace.store.dropped > 0);
  CHECK(report.metrics.behavioral_completeness < 1.0);
  CHECK(report.metrics.verdict == Verdict::Benign);  // payload lines arrive last
  CHECK(report.metrics.report_integrity == ReportIntegrity::Corrupted);
  CHECK(report.metrics.stability.ok);  // no crash, just blindness
}

TEST_CASE("oversized single-row report breaks at the transport") {
  WorkloadSpec spec;
  spec.max_depth = 40;
  spec.fan_out = {1};
  spec.arg_bytes_per_event = 150 * 1024;  // ~6 MB of args across the chain
  spec.terminal_payload = true;
  PipelineConfig config;
  config.serializer_limits.max_depth = 100000;
  config.serializer_limits.max_bytes = 1ULL << 32;
  config.store_limits.max_doc_depth = 1000000;
  config.store_limits.max_doc_bytes = 1ULL << 32;
  RunReport report = run(spec, config);
  REQUIRE_FALSE(report.metrics.stability.ok);
  CHECK(report.metrics.stability.failed_stage == Stage::Transport);
  CHECK(report.metrics.stability.reason.find("received message larger than max (") !=
        std::string::npos);
  // the events are in the backend, the analyst view is what broke
  CHECK(report.metrics.behavioral_completeness == 1.0);
  CHECK(report.render.rendered_nodes == 0);
}

TEST_CASE("prune policy saves a partial report but flips the verdict") {
  PipelineConfig config;
  config.serializer_limits.max_depth = 100;
  config.serializer_limits.breach_policy = BreachPolicy::PruneWithMarker;
  RunReport report = run(chain_spec(200), config);
  CHECK(report.metrics.report_integrity == ReportIntegrity::TruncatedWithMarkers);
  CHECK(report.metrics.behavioral_completeness > 0.0);
  CHECK(report.metrics.behavioral_completeness < 1.0);
  CHECK(report.metrics.verdict == Verdict::Benign);  // payload lives in the pruned tail
  CHECK(report.metrics.stability.ok);
  CHECK(report.trace.store.admitted == 1);
}

TEST_CASE("tree entry limit truncates the materialized document with markers") {
  WorkloadSpec spec;
  spec.max_depth = 7;
  spec.fan_out = {2};
  spec.terminal_payload = true;
  PipelineConfig config = naive_config();
  config.tree_entry_limit = 40;  // 255 events in ground truth
  config.renderer_lazy = true;
  RunReport report = run(spec, config);
  CHECK(report.metrics.report_integrity == ReportIntegrity::TruncatedWithMarkers);
  CHECK(report.metrics.behavioral_completeness < 1.0);
  // depth-first materialization keeps the first branch, which reaches the
  // terminal generation, so the payload stays visible
  CHECK(report.metrics.verdict == Verdict::Malicious);
}

TEST_CASE("forensic store receives rejected reports when capture is on") {
  PipelineConfig config = naive_config();
  config.forensic_capture = true;
  RunReport report = run(chain_spec(200), config);
  CHECK(report.metrics.report_integrity == ReportIntegrity::Missing);
  CHECK(report.forensic_artifacts == 1);
}

TEST_CASE("runs are deterministic") {
  WorkloadSpec spec;
  spec.max_depth = 6;
  spec.fan_out = {3};
  spec.arg_bytes_per_event = 40;
  spec.terminal_payload = true;
  spec.seed = 99;
  for (PipelineConfig config : {naive_config(), hardened_config()}) {
    RunReport a = run(spec, config);
    RunReport b = run(spec, config);
    CHECK(a.metrics.behavioral_completeness == b.metrics.behavioral_completeness);
    CHECK(a.metrics.recovered_events == b.metrics.recovered_events);
    CHECK(a.report_bytes == b.report_bytes);
    CHECK(a.trace.store.admitted == b.trace.store.admitted);
    REQUIRE(a.stored_documents.size() == b.stored_documents.size());
    for (size_t i = 0; i < a.stored_documents.size(); ++i) {
      CHECK(a.stored_documents[i] == b.stored_documents[i]);
    }
  }
}

TEST_CASE("streaming serializer keeps its buffer bounded while batch does not") {
  WorkloadSpec spec;
  spec.max_depth = 30;
  spec.arg_bytes_per_event = 20 * 1024;
  PipelineConfig batch = naive_config();
  PipelineConfig streaming = naive_config();
  streaming.serializer_streaming = true;
  streaming.serializer_window_bytes = 4096;
  RunReport a = run(spec, batch);
  RunReport b = run(spec, streaming);
  CHECK(a.metrics.overhead.peak_serializer_buffer_bytes > 500 * 1024);
  CHECK(b.metrics.overhead.peak_serializer_buffer_bytes <= 4096);
  CHECK(a.report_bytes == b.report_bytes);
}

TEST_CASE("infeasible workloads and invalid configs are precondition errors") {
  WorkloadSpec bomb;
  bomb.max_depth = 30;
  bomb.fan_out = {2};
  bomb.total_process_cap = 1000;
  CHECK_THROWS_AS(run(bomb, naive_config()), std::invalid_argument);

  PipelineConfig broken;
  broken.queue_capacity = 0;
  CHECK_THROWS_AS(run(WorkloadSpec{}, broken), std::invalid_argument);
}
