#include "tca/pipeline.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "tca/stream_encode.hpp"

namespace tca {

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Collector: return "collector";
    case Stage::Aggregator: return "aggregator";
    case Stage::Serializer: return "serializer";
    case Stage::Store: return "store";
    case Stage::Transport: return "transport";
    case Stage::Renderer: return "renderer";
  }
  return "unknown";
}

std::string to_string(Verdict v) { return v == Verdict::Malicious ? "malicious" : "benign"; }

std::string to_string(ReportIntegrity ri) {
  switch (ri) {
    case ReportIntegrity::Intact: return "intact";
    case ReportIntegrity::TruncatedWithMarkers: return "truncated_with_markers";
    case ReportIntegrity::Corrupted: return "corrupted";
    case ReportIntegrity::Missing: return "missing";
  }
  return "unknown";
}

const StageCounters& StageTrace::stage(Stage s) const {
  return const_cast<StageTrace*>(this)->stage(s);
}

StageCounters& StageTrace::stage(Stage s) {
  switch (s) {
    case Stage::Collector: return collector;
    case Stage::Aggregator: return aggregator;
    case Stage::Serializer: return serializer;
    case Stage::Store: return store;
    case Stage::Transport: return transport;
    case Stage::Renderer: return renderer;
  }
  return collector;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

bool can_join_run(const ProcessEvent& prev, const ProcessEvent& next) {
  return next.parent_id.has_value() && prev.parent_id.has_value() &&
         *next.parent_id == *prev.parent_id && next.generation == prev.generation &&
         !next.is_terminal_payload && !prev.is_terminal_payload && next.args == prev.args &&
         next.event_id == prev.event_id + 1;
}

bool can_anchor_run(const ProcessEvent& e) {
  return e.parent_id.has_value() && !e.is_terminal_payload;
}

}  // namespace

std::vector<PipelineEvent> aggregate_collapse_repeats(const std::vector<ProcessEvent>& events) {
  std::vector<PipelineEvent> out;
  out.reserve(events.size());
  std::vector<ProcessEvent> run;

  auto flush = [&]() {
    if (run.size() >= 2) {
      SpawnSummary s;
      s.parent_id = *run.front().parent_id;
      s.generation = run.front().generation;
      s.count = run.size();
      s.first_id = run.front().event_id;
      s.last_id = run.back().event_id;
      s.args = run.front().args;
      s.first_timestamp = run.front().timestamp;
      s.last_timestamp = run.back().timestamp;
      out.push_back(std::move(s));
    } else {
      for (auto& e : run) out.push_back(std::move(e));
    }
    run.clear();
  };

  for (const ProcessEvent& e : events) {
    if (!run.empty() && can_join_run(run.back(), e)) {
      run.push_back(e);
      continue;
    }
    flush();
    if (can_anchor_run(e)) {
      run.push_back(e);
    } else {
      out.push_back(e);
    }
  }
  flush();
  return out;
}

DocValue summary_to_record(const SpawnSummary& s) {
  DocValue::Map m;
  m.push_back({"summary", DocValue::boolean(true)});
  m.push_back({"parent_id", DocValue::integer(static_cast<int64_t>(s.parent_id))});
  m.push_back({"generation", DocValue::integer(s.generation)});
  m.push_back({"count", DocValue::integer(static_cast<int64_t>(s.count))});
  m.push_back({"first_id", DocValue::integer(static_cast<int64_t>(s.first_id))});
  m.push_back({"last_id", DocValue::integer(static_cast<int64_t>(s.last_id))});
  DocValue::Array args;
  for (const auto& a : s.args) args.push_back(DocValue::str(a));
  m.push_back({"args", DocValue::array(std::move(args))});
  m.push_back({"timestamp_first", DocValue::integer(s.first_timestamp)});
  m.push_back({"timestamp_last", DocValue::integer(s.last_timestamp)});
  return DocValue::map(std::move(m));
}

// ---------------------------------------------------------------------------
// Collector queue simulation

CollectorResult run_collector(const WorkloadStream& stream, uint64_t queue_capacity,
                              OverflowPolicy policy, const std::optional<Rational>& throttle) {
  CollectorResult result;
  result.offered = stream.size();
  result.admitted.reserve(stream.size());

  if (!throttle.has_value()) {
    // unbounded drain: nothing ever queues
    for (const auto& te : stream.events) result.admitted.push_back(te);
    result.sim_end = stream.events.empty() ? Rational{} : stream.events.back().emit_time;
    return result;
  }

  Rational dt = Rational::of(throttle->den, throttle->num);  // seconds per event
  struct Queued {
    size_t index;
    Rational enqueued_at;
  };
  std::deque<Queued> queue;
  Rational last_end{};
  Rational shift{};  // producer delay accumulated by back-pressure

  auto complete_front = [&]() {
    const Queued& front = queue.front();
    Rational start = last_end < front.enqueued_at ? front.enqueued_at : last_end;
    Rational end = start + dt;
    result.admitted.push_back({end, stream.events[front.index].event});
    last_end = end;
    queue.pop_front();
  };

  Rational last_arrival{};
  for (size_t i = 0; i < stream.events.size(); ++i) {
    Rational t = stream.events[i].emit_time + shift;
    // finish everything the drain completed by now
    while (!queue.empty()) {
      Rational start = last_end < queue.front().enqueued_at ? queue.front().enqueued_at : last_end;
      if (start + dt <= t) {
        complete_front();
      } else {
        break;
      }
    }
    if (queue.size() < queue_capacity) {
      queue.push_back({i, t});
    } else {
      switch (policy) {
        case OverflowPolicy::DropNewest:
          ++result.dropped;
          last_arrival = t;
          continue;
        case OverflowPolicy::DropOldest:
          queue.pop_front();
          ++result.dropped;
          queue.push_back({i, t});
          break;
        case OverflowPolicy::Backpressure: {
          // the producer stalls until the drain frees one slot
          complete_front();
          Rational resumed = last_end;
          if (t < resumed) {
            shift = resumed - stream.events[i].emit_time;
            t = resumed;
          }
          queue.push_back({i, t});
          break;
        }
      }
    }
    result.peak_queue = std::max<uint64_t>(result.peak_queue, queue.size());
    last_arrival = t;
  }
  while (!queue.empty()) complete_front();
  result.sim_end = last_end < last_arrival ? last_arrival : last_end;
  return result;
}

// ---------------------------------------------------------------------------
// Transport and renderer

std::string TransportResult::message() const {
  return "received message larger than max (" + std::to_string(actual) + " vs. " +
         std::to_string(max) + ")";
}

TransportResult transport_send(uint64_t message_bytes, uint64_t transport_max_bytes) {
  TransportResult r;
  r.actual = message_bytes;
  r.max = transport_max_bytes;
  r.ok = message_bytes <= transport_max_bytes;  // boundary inclusive
  return r;
}

TransportResult transport_send(const std::vector<uint8_t>& message, uint64_t transport_max_bytes) {
  return transport_send(message.size(), transport_max_bytes);
}

RenderOutcome render(uint64_t node_count, uint64_t budget, bool lazy) {
  RenderOutcome out;
  if (budget == 0) budget = 1;
  if (lazy) {
    out.rendered_nodes = node_count;
    out.pages = (node_count + budget - 1) / budget;
    out.stalled = false;
  } else {
    out.stalled = node_count > budget;
    out.rendered_nodes = std::min(node_count, budget);
    out.pages = node_count > 0 ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recovery scan and verdict

RecoveryScan scan_recoverable(const std::vector<DocValue>& stored_documents) {
  RecoveryScan scan;
  std::unordered_set<uint64_t> ids;
  std::vector<const DocValue*> stack;
  for (const auto& doc : stored_documents) stack.push_back(&doc);

  while (!stack.empty()) {
    const DocValue* node = stack.back();
    stack.pop_back();
    if (is_truncation_marker(*node)) continue;  // markers cover nothing
    if (node->kind() == DocValue::Kind::Array) {
      for (const auto& c : node->as_array()) {
        if (c.is_container()) stack.push_back(&c);
      }
      continue;
    }
    if (node->kind() != DocValue::Kind::Map) continue;

    const DocValue* summary = node->find("summary");
    if (summary != nullptr && summary->kind() == DocValue::Kind::Bool && summary->as_bool()) {
      const DocValue* first = node->find("first_id");
      const DocValue* last = node->find("last_id");
      if (first != nullptr && last != nullptr && first->kind() == DocValue::Kind::Int &&
          last->kind() == DocValue::Kind::Int && first->as_int() <= last->as_int()) {
        ++scan.entries;
        for (int64_t id = first->as_int(); id <= last->as_int(); ++id) {
          ids.insert(static_cast<uint64_t>(id));
        }
      }
      continue;
    }

    const DocValue* id = node->find("id");
    if (id != nullptr && id->kind() == DocValue::Kind::Int) {
      ++scan.entries;
      ids.insert(static_cast<uint64_t>(id->as_int()));
      const DocValue* payload = node->find("payload");
      if (payload != nullptr && payload->kind() == DocValue::Kind::Bool && payload->as_bool()) {
        scan.payload_recovered = true;
      }
    }
    for (const auto& e : node->as_map()) {
      if (e.value.is_container()) stack.push_back(&e.value);
    }
  }
  scan.recovered_events = ids.size();
  return scan;
}

Verdict verdict_of(const RecoveryScan& scan) {
  return scan.payload_recovered ? Verdict::Malicious : Verdict::Benign;
}

// ---------------------------------------------------------------------------
// Nested materialization with summaries and an optional entry limit

namespace {

struct LenientTree {
  std::optional<uint64_t> root;
  std::map<uint64_t, ProcessEvent> events;                 // reachable only
  std::map<uint64_t, std::vector<uint64_t>> children;
  std::map<uint64_t, uint64_t> subtree_size;               // events per subtree
};

// Builds the component reachable from the root, tolerating gaps left by
// dropped events (orphaned subtrees simply stay out of the report).
LenientTree lenient_tree(const std::vector<ProcessEvent>& events) {
  LenientTree t;
  std::unordered_map<uint64_t, const ProcessEvent*> by_id;
  for (const auto& e : events) {
    by_id.emplace(e.event_id, &e);
    if (!e.parent_id.has_value() && !t.root.has_value()) t.root = e.event_id;
  }
  if (!t.root.has_value()) return t;

  std::unordered_map<uint64_t, std::vector<uint64_t>> kids;
  for (const auto& e : events) {
    if (e.parent_id.has_value() && by_id.count(*e.parent_id) != 0) {
      kids[*e.parent_id].push_back(e.event_id);
    }
  }
  for (auto& [id, v] : kids) std::sort(v.begin(), v.end());

  std::vector<uint64_t> order{*t.root};
  for (size_t i = 0; i < order.size(); ++i) {
    uint64_t id = order[i];
    t.events.emplace(id, *by_id.at(id));
    auto it = kids.find(id);
    if (it != kids.end()) {
      t.children[id] = it->second;
      for (uint64_t c : it->second) order.push_back(c);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    uint64_t total = 1;
    for (uint64_t c : t.children[*it]) total += t.subtree_size[c];
    t.subtree_size[*it] = total;
  }
  return t;
}

DocValue::Map process_map_head(const ProcessEvent& e) {
  DocValue::Map m;
  m.push_back({"id", DocValue::integer(static_cast<int64_t>(e.event_id))});
  m.push_back({"timestamp", DocValue::integer(e.timestamp)});
  if (!e.args.empty()) {
    DocValue::Array args;
    args.reserve(e.args.size());
    for (const auto& a : e.args) args.push_back(DocValue::str(a));
    m.push_back({"args", DocValue::array(std::move(args))});
  }
  if (e.is_terminal_payload) m.push_back({"payload", DocValue::boolean(true)});
  return m;
}

std::optional<DocValue> materialize_nested(const LenientTree& t,
                                           const std::vector<SpawnSummary>& summaries,
                                           std::optional<uint64_t> entry_limit) {
  if (!t.root.has_value()) return std::nullopt;

  // Entry budget applies to process nodes, spent in depth-first order so
  // the kept set is a preorder prefix.
  std::unordered_set<uint64_t> selected;
  if (entry_limit.has_value()) {
    uint64_t budget = *entry_limit;
    std::vector<uint64_t> dfs{*t.root};
    while (!dfs.empty() && budget > 0) {
      uint64_t id = dfs.back();
      dfs.pop_back();
      selected.insert(id);
      --budget;
      auto it = t.children.find(id);
      if (it != t.children.end()) {
        for (auto c = it->second.rbegin(); c != it->second.rend(); ++c) dfs.push_back(*c);
      }
    }
    if (selected.count(*t.root) == 0) {
      return mapv({{"processes", make_truncation_marker(t.subtree_size.at(*t.root))}});
    }
  }
  auto keep = [&](uint64_t id) { return !entry_limit.has_value() || selected.count(id) != 0; };

  std::unordered_map<uint64_t, std::vector<const SpawnSummary*>> summaries_by_parent;
  for (const auto& s : summaries) summaries_by_parent[s.parent_id].push_back(&s);

  // bottom-up assembly over reversed breadth-first order
  std::vector<uint64_t> bfs{*t.root};
  for (size_t i = 0; i < bfs.size(); ++i) {
    auto it = t.children.find(bfs[i]);
    if (it != t.children.end()) {
      for (uint64_t c : it->second) bfs.push_back(c);
    }
  }
  std::unordered_map<uint64_t, DocValue> built;
  for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
    uint64_t id = *it;
    if (!keep(id)) continue;
    DocValue::Map m = process_map_head(t.events.at(id));
    DocValue::Array children;
    uint64_t omitted = 0;
    auto kid_it = t.children.find(id);
    if (kid_it != t.children.end()) {
      for (uint64_t c : kid_it->second) {
        if (keep(c)) {
          children.push_back(std::move(built.at(c)));
          built.erase(c);
        } else {
          omitted += t.subtree_size.at(c);
        }
      }
    }
    auto sum_it = summaries_by_parent.find(id);
    if (sum_it != summaries_by_parent.end()) {
      for (const SpawnSummary* s : sum_it->second) children.push_back(summary_to_record(*s));
    }
    if (omitted > 0) children.push_back(make_truncation_marker(omitted));
    m.push_back({"children", DocValue::array(std::move(children))});
    built.emplace(id, DocValue::map(std::move(m)));
  }
  return mapv({{"processes", std::move(built.at(*t.root))}});
}

// ---------------------------------------------------------------------------
// Serialization step shared by the three store modes

struct SerializedDoc {
  bool ok = false;
  DocValue final_doc;           // post-prune when the policy truncates
  std::vector<uint8_t> bytes;
  bool truncated = false;
  std::string error;
};

std::string describe_serializer_failure(FailReason reason, const DocValue& doc,
                                        EncodingKind kind, const SerializerLimits& limits) {
  switch (reason) {
    case FailReason::SizeExceeded:
      return to_string(reason) + " (" + std::to_string(measure_size(doc, kind)) + " > " +
             std::to_string(limits.max_bytes) + " bytes)";
    default:
      return to_string(reason) + " (depth " + std::to_string(measure_depth(doc)) + " > " +
             std::to_string(limits.max_depth) + ")";
  }
}

SerializedDoc serialize_doc(const DocValue& doc, const PipelineConfig& config,
                            uint64_t& peak_buffer) {
  const SerializerLimits& limits = config.serializer_limits;
  EncodingKind kind = config.serializer_encoding;
  SerializedDoc result;
  result.final_doc = doc;

  if (limits.breach_policy == BreachPolicy::PruneWithMarker &&
      (measure_depth(doc) > limits.max_depth || measure_size(doc, kind) > limits.max_bytes)) {
    PruneResult pruned = prune_to_limits(doc, kind, limits);
    if (!pruned.ok) {
      result.error = describe_serializer_failure(pruned.reason, doc, kind, limits);
      return result;
    }
    result.final_doc = std::move(pruned.pruned);
    result.truncated = true;
  }

  if (config.serializer_streaming) {
    DocValueEvents events(result.final_doc);
    StreamOutcome out = encode_stream(
        events.as_source(), kind, limits,
        [&](const uint8_t* data, size_t n) {
          result.bytes.insert(result.bytes.end(), data, data + n);
          return true;
        },
        config.serializer_window_bytes);
    peak_buffer = std::max(peak_buffer, out.peak_buffer_bytes);
    if (!out.ok()) {
      result.bytes.clear();
      result.error = describe_serializer_failure(*out.reason, result.final_doc, kind, limits);
      return result;
    }
  } else {
    uint64_t depth = measure_depth(result.final_doc);
    if (depth > limits.max_depth) {
      result.error = describe_serializer_failure(limits.depth_reason(), result.final_doc, kind, limits);
      return result;
    }
    uint64_t size = measure_size(result.final_doc, kind);
    if (size > limits.max_bytes) {
      result.error =
          describe_serializer_failure(FailReason::SizeExceeded, result.final_doc, kind, limits);
      return result;
    }
    result.bytes = encode_unchecked(result.final_doc, kind);
    peak_buffer = std::max<uint64_t>(peak_buffer, result.bytes.size());
  }
  result.ok = true;
  return result;
}

std::string describe_store_rejection(RejectReason reason, const DocValue& doc,
                                     const StoreLimits& limits) {
  switch (reason) {
    case RejectReason::DepthCap:
      return "DepthCap (depth " + std::to_string(measure_depth(doc)) + " > " +
             std::to_string(limits.max_doc_depth) + ")";
    case RejectReason::SizeCap:
      return "SizeCap (" + std::to_string(measure_size(doc, EncodingKind::Binary)) + " > " +
             std::to_string(limits.max_doc_bytes) + " bytes)";
    case RejectReason::TotalCap:
      return "TotalCap (store full at " + std::to_string(*limits.max_total_bytes) + " bytes)";
  }
  return "rejected";
}

DocValue marker_record_for(const DocValue& record) {
  DocValue::Map m;
  m.push_back({kTruncationMarkerKey, DocValue::boolean(true)});
  m.push_back({"removed", DocValue::integer(1)});
  const DocValue* id = record.find("id");
  if (id != nullptr && id->kind() == DocValue::Kind::Int) {
    m.push_back({"dropped_id", DocValue::integer(id->as_int())});
  }
  return DocValue::map(std::move(m));
}

constexpr size_t kMaxTraceErrors = 8;

void push_error(StageCounters& counters, const std::string& error) {
  if (counters.errors.size() < kMaxTraceErrors) counters.errors.push_back(error);
}

}  // namespace

// ---------------------------------------------------------------------------
// run()

RunReport run(const WorkloadSpec& spec, const PipelineConfig& config) {
  if (!config.valid()) throw std::invalid_argument("invalid pipeline config");
  GenerateResult gen = generate(spec);
  if (!gen.ok()) throw std::invalid_argument(*gen.cap_exceeded);
  const WorkloadStream& stream = *gen.stream;
  ProcessTree truth = ground_truth(stream);

  RunReport report;
  report.workload = spec;
  report.config = config;
  StageTrace& trace = report.trace;

  Stability stability;
  auto fail_stage = [&](Stage s, const std::string& reason) {
    push_error(trace.stage(s), reason);
    if (stability.ok) {
      stability.ok = false;
      stability.failed_stage = s;
      stability.reason = reason;
    }
  };

  // --- collector ---
  CollectorResult collected =
      run_collector(stream, config.queue_capacity, config.overflow_policy, config.throttle);
  trace.collector.offered = collected.offered;
  trace.collector.admitted = collected.admitted.size();
  trace.collector.dropped = collected.dropped;
  report.sim_duration = collected.sim_end;
  int64_t now_ts = kEpochBase + collected.sim_end.floor();

  // --- aggregator ---
  std::vector<ProcessEvent> admitted_events;
  admitted_events.reserve(collected.admitted.size());
  for (const auto& te : collected.admitted) admitted_events.push_back(te.event);

  std::vector<PipelineEvent> staged;
  trace.aggregator.offered = admitted_events.size();
  if (config.aggregation == AggregationMode::CollapseRepeats) {
    staged = aggregate_collapse_repeats(admitted_events);
  } else {
    staged.reserve(admitted_events.size());
    for (auto& e : admitted_events) staged.push_back(std::move(e));
  }
  trace.aggregator.admitted = staged.size();
  for (const auto& pe : staged) {
    if (const auto* s = std::get_if<SpawnSummary>(&pe)) {
      trace.aggregator.aggregated += s->count - 1;  // members absorbed beyond the summary itself
    }
  }

  ForensicStore forensic;
  DocumentStore store(config.store_limits, config.forensic_capture ? &forensic : nullptr);

  uint64_t peak_buffer = 0;
  uint64_t render_nodes = 0;

  switch (config.store_limits.mode) {
    case StoreMode::SingleDocument: {
      std::vector<ProcessEvent> plain;
      std::vector<SpawnSummary> summaries;
      for (const auto& pe : staged) {
        if (const auto* e = std::get_if<ProcessEvent>(&pe)) {
          plain.push_back(*e);
        } else {
          summaries.push_back(std::get<SpawnSummary>(pe));
        }
      }
      LenientTree tree = lenient_tree(plain);
      std::optional<DocValue> doc = materialize_nested(tree, summaries, config.tree_entry_limit);
      if (!doc.has_value()) break;  // nothing survived collection; report stays missing

      trace.serializer.offered = 1;
      SerializedDoc serialized = serialize_doc(*doc, config, peak_buffer);
      if (!serialized.ok) {
        trace.serializer.rejected = 1;
        fail_stage(Stage::Serializer, serialized.error);
        break;
      }
      trace.serializer.admitted = 1;

      trace.store.offered = 1;
      InsertOutcome inserted = store.insert(serialized.final_doc, now_ts);
      if (!inserted.accepted()) {
        trace.store.rejected = 1;
        fail_stage(Stage::Store,
                   describe_store_rejection(*inserted.reason, serialized.final_doc,
                                            config.store_limits));
        break;
      }
      trace.store.admitted = 1;
      report.stored_documents.push_back(serialized.final_doc);
      report.report_bytes = serialized.bytes.size();

      trace.transport.offered = 1;
      TransportResult sent = transport_send(serialized.bytes, config.transport_max_bytes);
      if (!sent.ok) {
        trace.transport.rejected = 1;
        fail_stage(Stage::Transport, sent.message());
        break;
      }
      trace.transport.admitted = 1;
      render_nodes = scan_recoverable({serialized.final_doc}).entries;
      break;
    }

    case StoreMode::ChunkedRecords: {
      std::vector<DocValue> records;
      records.reserve(staged.size());
      for (const auto& pe : staged) {
        if (const auto* e = std::get_if<ProcessEvent>(&pe)) {
          records.push_back(event_to_flat_record(*e));
        } else {
          records.push_back(summary_to_record(std::get<SpawnSummary>(pe)));
        }
      }

      trace.serializer.offered = records.size();
      std::vector<DocValue> to_store;
      std::vector<std::vector<uint8_t>> wire;
      to_store.reserve(records.size());
      for (const auto& record : records) {
        SerializedDoc serialized = serialize_doc(record, config, peak_buffer);
        if (!serialized.ok) {
          ++trace.serializer.rejected;
          push_error(trace.serializer, serialized.error);
          to_store.push_back(marker_record_for(record));
          wire.push_back({});
          continue;
        }
        ++trace.serializer.admitted;
        to_store.push_back(serialized.final_doc);
        wire.push_back(std::move(serialized.bytes));
      }

      trace.store.offered = records.size();
      std::vector<InsertOutcome> outcomes = store.insert_chunked(to_store, now_ts);
      std::vector<DocValue> rejected_markers;
      for (size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].accepted()) {
          ++trace.store.admitted;
          continue;
        }
        ++trace.store.rejected;
        push_error(trace.store, describe_store_rejection(*outcomes[i].reason, to_store[i],
                                                         config.store_limits));
        rejected_markers.push_back(marker_record_for(to_store[i]));
      }
      if (!rejected_markers.empty()) store.insert_chunked(rejected_markers, now_ts);
      report.stored_documents = store.documents();

      // one message per accepted record
      uint64_t transported = 0;
      for (size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].accepted() || wire[i].empty()) continue;
        ++trace.transport.offered;
        report.report_bytes += wire[i].size();
        TransportResult sent = transport_send(wire[i], config.transport_max_bytes);
        if (sent.ok) {
          ++trace.transport.admitted;
          ++transported;
        } else {
          ++trace.transport.rejected;
          fail_stage(Stage::Transport, sent.message());
        }
      }
      render_nodes = transported;
      break;
    }

    case StoreMode::AppendLog: {
      std::vector<DocValue> lines;
      lines.reserve(staged.size());
      for (const auto& pe : staged) {
        if (const auto* e = std::get_if<ProcessEvent>(&pe)) {
          lines.push_back(event_to_flat_record(*e));
        } else {
          lines.push_back(summary_to_record(std::get<SpawnSummary>(pe)));
        }
      }
      trace.serializer.offered = lines.size();
      uint64_t transported = 0;
      for (const auto& line : lines) {
        SerializedDoc serialized = serialize_doc(line, config, peak_buffer);
        DocValue final_line = serialized.ok ? serialized.final_doc : marker_record_for(line);
        if (serialized.ok) {
          ++trace.serializer.admitted;
        } else {
          ++trace.serializer.rejected;
          push_error(trace.serializer, serialized.error);
        }
        ++trace.store.offered;
        InsertOutcome appended =
            store.append_log(final_line, config.append_drop_when_behind, now_ts);
        if (appended.accepted()) {
          ++trace.store.admitted;
        } else {
          // silent by design: no stage failure, only the honest counter
          ++trace.store.dropped;
          continue;
        }
        if (serialized.ok) {
          ++trace.transport.offered;
          report.report_bytes += serialized.bytes.size() + 1;
          TransportResult sent = transport_send(serialized.bytes, config.transport_max_bytes);
          if (sent.ok) {
            ++trace.transport.admitted;
            ++transported;
          } else {
            ++trace.transport.rejected;
            fail_stage(Stage::Transport, sent.message());
          }
        }
      }
      report.stored_documents = store.documents();
      render_nodes = transported;
      break;
    }
  }

  // --- renderer ---
  trace.renderer.offered = render_nodes;
  report.render = render(render_nodes, config.renderer_node_budget, config.renderer_lazy);
  trace.renderer.admitted = report.render.rendered_nodes;
  trace.renderer.dropped = render_nodes - report.render.rendered_nodes;
  if (report.render.stalled) {
    fail_stage(Stage::Renderer, "render stalled (" + std::to_string(render_nodes) + " nodes > budget " +
                                    std::to_string(config.renderer_node_budget) + ")");
  }

  // --- metrics, from the final queryable state only ---
  RecoveryScan scan = scan_recoverable(report.stored_documents);
  RunMetrics& metrics = report.metrics;
  metrics.ground_truth_events = truth.size();
  metrics.recovered_events = std::min<uint64_t>(scan.recovered_events, truth.size());
  metrics.behavioral_completeness =
      truth.size() == 0 ? 1.0
                        : static_cast<double>(metrics.recovered_events) /
                              static_cast<double>(metrics.ground_truth_events);
  metrics.verdict = verdict_of(scan);
  metrics.stability = stability;

  bool markers_present = false;
  for (const auto& doc : report.stored_documents) {
    markers_present = markers_present || contains_truncation_marker(doc);
  }
  if (report.stored_documents.empty()) {
    metrics.report_integrity = ReportIntegrity::Missing;
  } else if (markers_present) {
    metrics.report_integrity = ReportIntegrity::TruncatedWithMarkers;
  } else if (metrics.recovered_events == metrics.ground_truth_events) {
    metrics.report_integrity = ReportIntegrity::Intact;
  } else {
    metrics.report_integrity = ReportIntegrity::Corrupted;  // silent incompleteness
  }

  Rational duration = report.sim_duration;
  Rational one_slot = Rational::of(spec.events_per_second.den, spec.events_per_second.num);
  if (duration < one_slot) duration = one_slot;
  metrics.overhead.events_per_second =
      static_cast<double>(trace.collector.offered) / duration.to_double();
  metrics.overhead.peak_queue_len = collected.peak_queue;
  metrics.overhead.peak_serializer_buffer_bytes = peak_buffer;

  report.forensic_artifacts = forensic.size();
  return report;
}

}  // namespace tca
