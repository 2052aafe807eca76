#include "tca/report_io.hpp"

#include "tca/codec.hpp"
#include "tca/names.hpp"

namespace tca {

uint64_t fnv1a64(const uint8_t* data, size_t size) {
  uint64_t hash = 0xCBF29CE484222325ULL;
  for (size_t i = 0; i < size; ++i) {
    hash ^= data[i];
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string fnv1a64_hex(const std::vector<uint8_t>& bytes) {
  static const char* hex = "0123456789abcdef";
  uint64_t h = fnv1a64(bytes.data(), bytes.size());
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

namespace {

DocValue u64(uint64_t v) { return DocValue::integer(static_cast<int64_t>(v)); }

DocValue workload_doc(const WorkloadSpec& spec) {
  DocValue::Array fan;
  for (uint32_t f : spec.fan_out) fan.push_back(u64(f));
  return mapv({
      {"max_depth", u64(spec.max_depth)},
      {"fan_out", DocValue::array(std::move(fan))},
      {"arg_bytes_per_event", u64(spec.arg_bytes_per_event)},
      {"events_per_second", DocValue::str(spec.events_per_second.to_string())},
      {"total_process_cap", u64(spec.total_process_cap)},
      {"seed", u64(spec.seed)},
      {"terminal_payload", DocValue::boolean(spec.terminal_payload)},
  });
}

DocValue pipeline_doc(const PipelineConfig& c) {
  DocValue::Map m;
  m.push_back({"queue_capacity", u64(c.queue_capacity)});
  m.push_back({"overflow_policy", DocValue::str(to_string(c.overflow_policy))});
  m.push_back({"throttle", c.throttle.has_value() ? DocValue::str(c.throttle->to_string())
                                                  : DocValue::null()});
  m.push_back({"aggregation", DocValue::str(to_string(c.aggregation))});
  m.push_back({"serializer",
               mapv({
                   {"max_depth", u64(c.serializer_limits.max_depth)},
                   {"max_bytes", u64(c.serializer_limits.max_bytes)},
                   {"breach_policy", DocValue::str(to_string(c.serializer_limits.breach_policy))},
                   {"recursion_guard", DocValue::boolean(c.serializer_limits.recursion_guard)},
                   {"encoding", DocValue::str(to_string(c.serializer_encoding))},
                   {"streaming", DocValue::boolean(c.serializer_streaming)},
                   {"window_bytes", u64(c.serializer_window_bytes)},
               })});
  m.push_back({"store",
               mapv({
                   {"mode", DocValue::str(to_string(c.store_limits.mode))},
                   {"max_doc_bytes", u64(c.store_limits.max_doc_bytes)},
                   {"max_doc_depth", u64(c.store_limits.max_doc_depth)},
                   {"max_total_bytes", c.store_limits.max_total_bytes.has_value()
                                           ? u64(*c.store_limits.max_total_bytes)
                                           : DocValue::null()},
               })});
  m.push_back({"append_drop_when_behind", DocValue::boolean(c.append_drop_when_behind)});
  m.push_back({"forensic_capture", DocValue::boolean(c.forensic_capture)});
  m.push_back({"transport_max_bytes", u64(c.transport_max_bytes)});
  m.push_back({"renderer_node_budget", u64(c.renderer_node_budget)});
  m.push_back({"renderer_lazy", DocValue::boolean(c.renderer_lazy)});
  m.push_back({"tree_entry_limit",
               c.tree_entry_limit.has_value() ? u64(*c.tree_entry_limit) : DocValue::null()});
  return DocValue::map(std::move(m));
}

DocValue counters_doc(const StageCounters& c) {
  DocValue::Array errors;
  for (const auto& e : c.errors) errors.push_back(DocValue::str(e));
  return mapv({
      {"offered", u64(c.offered)},
      {"admitted", u64(c.admitted)},
      {"dropped", u64(c.dropped)},
      {"aggregated", u64(c.aggregated)},
      {"rejected", u64(c.rejected)},
      {"errors", DocValue::array(std::move(errors))},
  });
}

DocValue metrics_doc(const RunMetrics& m) {
  DocValue stability =
      m.stability.ok
          ? mapv({{"ok", DocValue::boolean(true)}})
          : mapv({{"ok", DocValue::boolean(false)},
                  {"stage", DocValue::str(to_string(m.stability.failed_stage))},
                  {"reason", DocValue::str(m.stability.reason)}});
  return mapv({
      {"behavioral_completeness", DocValue::real(m.behavioral_completeness)},
      {"ground_truth_events", u64(m.ground_truth_events)},
      {"recovered_events", u64(m.recovered_events)},
      {"verdict", DocValue::str(to_string(m.verdict))},
      {"stability", std::move(stability)},
      {"report_integrity", DocValue::str(to_string(m.report_integrity))},
      {"overhead", mapv({
                       {"events_per_second", DocValue::real(m.overhead.events_per_second)},
                       {"peak_queue_len", u64(m.overhead.peak_queue_len)},
                       {"peak_serializer_buffer_bytes",
                        u64(m.overhead.peak_serializer_buffer_bytes)},
                   })},
  });
}

}  // namespace

DocValue run_report_to_doc(const RunReport& report, const std::string& scenario_name) {
  std::vector<uint8_t> payload;
  for (const auto& doc : report.stored_documents) {
    std::vector<uint8_t> bytes = encode_unchecked(doc, EncodingKind::Binary);
    payload.insert(payload.end(), bytes.begin(), bytes.end());
  }
  return mapv({
      {"scenario", DocValue::str(scenario_name)},
      {"workload", workload_doc(report.workload)},
      {"pipeline", pipeline_doc(report.config)},
      {"trace", mapv({
                    {"collector", counters_doc(report.trace.collector)},
                    {"aggregator", counters_doc(report.trace.aggregator)},
                    {"serializer", counters_doc(report.trace.serializer)},
                    {"store", counters_doc(report.trace.store)},
                    {"transport", counters_doc(report.trace.transport)},
                    {"renderer", counters_doc(report.trace.renderer)},
                })},
      {"metrics", metrics_doc(report.metrics)},
      {"render", mapv({
                     {"rendered_nodes", u64(report.render.rendered_nodes)},
                     {"stalled", DocValue::boolean(report.render.stalled)},
                     {"pages", u64(report.render.pages)},
                 })},
      {"report", mapv({
                     {"documents", u64(report.stored_documents.size())},
                     {"bytes", u64(report.report_bytes)},
                     {"digest", DocValue::str(fnv1a64_hex(payload))},
                 })},
      {"forensic_artifacts", u64(report.forensic_artifacts)},
      {"sim_duration_seconds", DocValue::str(report.sim_duration.to_string())},
  });
}

std::vector<uint8_t> run_report_bytes(const RunReport& report, const std::string& scenario_name) {
  std::vector<uint8_t> bytes = encode_unchecked(run_report_to_doc(report, scenario_name),
                                                EncodingKind::Text);
  bytes.push_back('\n');
  return bytes;
}

namespace {

bool read_u64(const DocValue& m, const char* key, uint64_t& out) {
  const DocValue* v = m.find(key);
  if (v == nullptr || v->kind() != DocValue::Kind::Int) return false;
  out = static_cast<uint64_t>(v->as_int());
  return true;
}

bool read_u32(const DocValue& m, const char* key, uint32_t& out) {
  uint64_t v = 0;
  if (!read_u64(m, key, v)) return false;
  out = static_cast<uint32_t>(v);
  return true;
}

bool read_bool(const DocValue& m, const char* key, bool& out) {
  const DocValue* v = m.find(key);
  if (v == nullptr || v->kind() != DocValue::Kind::Bool) return false;
  out = v->as_bool();
  return true;
}

bool read_rational(const DocValue& m, const char* key, Rational& out) {
  const DocValue* v = m.find(key);
  if (v == nullptr || v->kind() != DocValue::Kind::Str) return false;
  auto parsed = Rational::parse(v->as_str());
  if (!parsed.has_value()) return false;
  out = *parsed;
  return true;
}

}  // namespace

std::optional<ParsedSnapshot> snapshot_from_doc(const DocValue& report_doc) {
  const DocValue* w = report_doc.find("workload");
  const DocValue* p = report_doc.find("pipeline");
  if (w == nullptr || p == nullptr) return std::nullopt;

  ParsedSnapshot snap;
  WorkloadSpec& spec = snap.workload;
  if (!read_u32(*w, "max_depth", spec.max_depth)) return std::nullopt;
  const DocValue* fan = w->find("fan_out");
  if (fan == nullptr || fan->kind() != DocValue::Kind::Array) return std::nullopt;
  spec.fan_out.clear();
  for (const auto& f : fan->as_array()) {
    if (f.kind() != DocValue::Kind::Int) return std::nullopt;
    spec.fan_out.push_back(static_cast<uint32_t>(f.as_int()));
  }
  if (!read_u64(*w, "arg_bytes_per_event", spec.arg_bytes_per_event)) return std::nullopt;
  if (!read_rational(*w, "events_per_second", spec.events_per_second)) return std::nullopt;
  if (!read_u64(*w, "total_process_cap", spec.total_process_cap)) return std::nullopt;
  if (!read_u64(*w, "seed", spec.seed)) return std::nullopt;
  if (!read_bool(*w, "terminal_payload", spec.terminal_payload)) return std::nullopt;

  PipelineConfig& c = snap.config;
  if (!read_u64(*p, "queue_capacity", c.queue_capacity)) return std::nullopt;
  const DocValue* policy = p->find("overflow_policy");
  if (policy == nullptr || policy->kind() != DocValue::Kind::Str) return std::nullopt;
  auto parsed_policy = parse_overflow_policy(policy->as_str());
  if (!parsed_policy.has_value()) return std::nullopt;
  c.overflow_policy = *parsed_policy;
  const DocValue* throttle = p->find("throttle");
  if (throttle == nullptr) return std::nullopt;
  if (throttle->kind() == DocValue::Kind::Str) {
    auto parsed = Rational::parse(throttle->as_str());
    if (!parsed.has_value()) return std::nullopt;
    c.throttle = *parsed;
  } else {
    c.throttle.reset();
  }
  const DocValue* agg = p->find("aggregation");
  if (agg == nullptr || agg->kind() != DocValue::Kind::Str) return std::nullopt;
  auto parsed_agg = parse_aggregation_mode(agg->as_str());
  if (!parsed_agg.has_value()) return std::nullopt;
  c.aggregation = *parsed_agg;

  const DocValue* ser = p->find("serializer");
  if (ser == nullptr) return std::nullopt;
  if (!read_u32(*ser, "max_depth", c.serializer_limits.max_depth)) return std::nullopt;
  if (!read_u64(*ser, "max_bytes", c.serializer_limits.max_bytes)) return std::nullopt;
  const DocValue* breach = ser->find("breach_policy");
  if (breach == nullptr || breach->kind() != DocValue::Kind::Str) return std::nullopt;
  auto parsed_breach = parse_breach_policy(breach->as_str());
  if (!parsed_breach.has_value()) return std::nullopt;
  c.serializer_limits.breach_policy = *parsed_breach;
  if (!read_bool(*ser, "recursion_guard", c.serializer_limits.recursion_guard)) return std::nullopt;
  const DocValue* enc = ser->find("encoding");
  if (enc == nullptr || enc->kind() != DocValue::Kind::Str) return std::nullopt;
  auto parsed_enc = parse_encoding_kind(enc->as_str());
  if (!parsed_enc.has_value()) return std::nullopt;
  c.serializer_encoding = *parsed_enc;
  if (!read_bool(*ser, "streaming", c.serializer_streaming)) return std::nullopt;
  if (!read_u64(*ser, "window_bytes", c.serializer_window_bytes)) return std::nullopt;

  const DocValue* store = p->find("store");
  if (store == nullptr) return std::nullopt;
  const DocValue* mode = store->find("mode");
  if (mode == nullptr || mode->kind() != DocValue::Kind::Str) return std::nullopt;
  auto parsed_mode = parse_store_mode(mode->as_str());
  if (!parsed_mode.has_value()) return std::nullopt;
  c.store_limits.mode = *parsed_mode;
  if (!read_u64(*store, "max_doc_bytes", c.store_limits.max_doc_bytes)) return std::nullopt;
  if (!read_u32(*store, "max_doc_depth", c.store_limits.max_doc_depth)) return std::nullopt;
  const DocValue* total = store->find("max_total_bytes");
  if (total == nullptr) return std::nullopt;
  if (total->kind() == DocValue::Kind::Int) {
    c.store_limits.max_total_bytes = static_cast<uint64_t>(total->as_int());
  } else {
    c.store_limits.max_total_bytes.reset();
  }

  if (!read_bool(*p, "append_drop_when_behind", c.append_drop_when_behind)) return std::nullopt;
  if (!read_bool(*p, "forensic_capture", c.forensic_capture)) return std::nullopt;
  if (!read_u64(*p, "transport_max_bytes", c.transport_max_bytes)) return std::nullopt;
  if (!read_u64(*p, "renderer_node_budget", c.renderer_node_budget)) return std::nullopt;
  if (!read_bool(*p, "renderer_lazy", c.renderer_lazy)) return std::nullopt;
  const DocValue* entry = p->find("tree_entry_limit");
  if (entry == nullptr) return std::nullopt;
  if (entry->kind() == DocValue::Kind::Int) {
    c.tree_entry_limit = static_cast<uint64_t>(entry->as_int());
  } else {
    c.tree_entry_limit.reset();
  }
  return snap;
}

}  // namespace tca
