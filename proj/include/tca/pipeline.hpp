#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tca/codec.hpp"
#include "tca/doc_value.hpp"
#include "tca/store.hpp"
#include "tca/workload.hpp"

namespace tca {

enum class OverflowPolicy : uint8_t { DropNewest, DropOldest, Backpressure };
enum class AggregationMode : uint8_t { Off, CollapseRepeats };
enum class Stage : uint8_t { Collector, Aggregator, Serializer, Store, Transport, Renderer };

std::string to_string(Stage stage);

/// Every limit and policy knob across the six stages.
struct PipelineConfig {
  uint64_t queue_capacity = 4096;
  OverflowPolicy overflow_policy = OverflowPolicy::DropNewest;
  /// Collector drain rate in events/second; unset means the collector keeps
  /// up with any burst.
  std::optional<Rational> throttle;
  AggregationMode aggregation = AggregationMode::Off;

  SerializerLimits serializer_limits;
  EncodingKind serializer_encoding = EncodingKind::Text;
  /// Incremental encoding with a bounded buffer instead of materializing
  /// the whole report in the serializer.
  bool serializer_streaming = false;
  uint64_t serializer_window_bytes = 64 * 1024;

  StoreLimits store_limits;
  /// AppendLog mode: drop lines once the log is over its cap instead of
  /// growing without bound.
  bool append_drop_when_behind = true;
  /// Route payloads the main store rejects into an isolated forensic store.
  bool forensic_capture = false;

  uint64_t transport_max_bytes = 4 * 1024 * 1024;
  uint64_t renderer_node_budget = 10000;
  bool renderer_lazy = false;
  /// Cap on process entries materialized into one nested document; the cut
  /// points carry truncation markers.
  std::optional<uint64_t> tree_entry_limit;

  bool valid() const {
    return queue_capacity > 0 && serializer_limits.valid() && store_limits.valid() &&
           transport_max_bytes > 0 && renderer_node_budget > 0 &&
           (!throttle.has_value() || throttle->num > 0);
  }
};

/// Run of identical sibling spawns collapsed into one record. Payload
/// events are never absorbed into summaries.
struct SpawnSummary {
  uint64_t parent_id = 0;
  uint32_t generation = 0;
  uint64_t count = 0;
  uint64_t first_id = 0;
  uint64_t last_id = 0;
  std::vector<std::string> args;
  int64_t first_timestamp = 0;
  int64_t last_timestamp = 0;
};

using PipelineEvent = std::variant<ProcessEvent, SpawnSummary>;

/// Collapses maximal runs of consecutive events that share a parent and
/// args, carry no payload flag, and have contiguous ids. Runs shorter than
/// two pass through untouched.
std::vector<PipelineEvent> aggregate_collapse_repeats(const std::vector<ProcessEvent>& events);

/// Flat record for a summary: Map{"summary": true, parent_id, generation,
/// count, first_id, last_id, args, timestamps}.
DocValue summary_to_record(const SpawnSummary& summary);

struct StageCounters {
  uint64_t offered = 0;
  uint64_t admitted = 0;
  uint64_t dropped = 0;
  uint64_t aggregated = 0;  // events absorbed into summaries
  uint64_t rejected = 0;
  std::vector<std::string> errors;
};

struct StageTrace {
  StageCounters collector;
  StageCounters aggregator;
  StageCounters serializer;
  StageCounters store;
  StageCounters transport;
  StageCounters renderer;

  const StageCounters& stage(Stage s) const;
  StageCounters& stage(Stage s);
};

struct CollectorResult {
  std::vector<TimedEvent> admitted;
  uint64_t offered = 0;
  uint64_t dropped = 0;
  uint64_t peak_queue = 0;
  Rational sim_end;
};

/// Deterministic bounded-queue simulation of the collector: arrivals at the
/// workload's emit times, drain at the throttle rate (instant when unset).
CollectorResult run_collector(const WorkloadStream& stream, uint64_t queue_capacity,
                              OverflowPolicy policy, const std::optional<Rational>& throttle);

struct TransportResult {
  bool ok = true;
  uint64_t actual = 0;
  uint64_t max = 0;

  /// Failure text preserving both figures: "received message larger than
  /// max (<actual> vs. <max>)".
  std::string message() const;
};

TransportResult transport_send(uint64_t message_bytes, uint64_t transport_max_bytes);
TransportResult transport_send(const std::vector<uint8_t>& message, uint64_t transport_max_bytes);

struct RenderOutcome {
  uint64_t rendered_nodes = 0;
  bool stalled = false;
  uint64_t pages = 0;
};

/// Eager rendering stalls (and renders nothing past the budget) when the
/// node count exceeds it; lazy rendering pages through everything with
/// page_size = budget.
RenderOutcome render(uint64_t node_count, uint64_t budget, bool lazy);

enum class Verdict : uint8_t { Malicious, Benign };
enum class ReportIntegrity : uint8_t { Intact, TruncatedWithMarkers, Corrupted, Missing };

std::string to_string(Verdict v);
std::string to_string(ReportIntegrity ri);

struct Stability {
  bool ok = true;
  Stage failed_stage = Stage::Collector;
  std::string reason;
};

/// What a reader of the final queryable state can still see.
struct RecoveryScan {
  uint64_t entries = 0;          // process nodes + summary nodes encountered
  uint64_t recovered_events = 0; // distinct event ids covered
  bool payload_recovered = false;
};

/// Walks stored documents (nested reports, flat records or summaries) and
/// collects the event ids still visible, counting summary members as
/// covered. Truncation markers cover nothing.
RecoveryScan scan_recoverable(const std::vector<DocValue>& stored_documents);

/// Malicious iff at least one terminal-payload event is still visible.
Verdict verdict_of(const RecoveryScan& scan);

struct Overhead {
  double events_per_second = 0.0;  // simulated processing rate
  uint64_t peak_queue_len = 0;
  uint64_t peak_serializer_buffer_bytes = 0;
};

struct RunMetrics {
  double behavioral_completeness = 0.0;
  uint64_t ground_truth_events = 0;
  uint64_t recovered_events = 0;
  Verdict verdict = Verdict::Benign;
  Stability stability;
  ReportIntegrity report_integrity = ReportIntegrity::Missing;
  Overhead overhead;
};

struct RunReport {
  WorkloadSpec workload;
  PipelineConfig config;
  StageTrace trace;
  RunMetrics metrics;
  RenderOutcome render;
  /// Final queryable content: the stored nested report (one entry) or the
  /// accepted chunk/log records.
  std::vector<DocValue> stored_documents;
  uint64_t report_bytes = 0;
  uint64_t forensic_artifacts = 0;
  Rational sim_duration;
};

/// Executes the six-stage pipeline on a generated workload. Deterministic
/// for a fixed spec and config; every failure lands inside the report
/// rather than escaping as an error. Throws std::invalid_argument only for
/// infeasible specs or invalid configs (precondition violations).
RunReport run(const WorkloadSpec& spec, const PipelineConfig& config);

}  // namespace tca
