#include "tca/names.hpp"

namespace tca {

std::string to_string(OverflowPolicy policy) {
  switch (policy) {
    case OverflowPolicy::DropNewest: return "drop_newest";
    case OverflowPolicy::DropOldest: return "drop_oldest";
    case OverflowPolicy::Backpressure: return "backpressure";
  }
  return "unknown";
}

std::string to_string(AggregationMode mode) {
  return mode == AggregationMode::Off ? "off" : "collapse_repeats";
}

std::string to_string(BreachPolicy policy) {
  switch (policy) {
    case BreachPolicy::FailHard: return "fail_hard";
    case BreachPolicy::PruneWithMarker: return "prune_with_marker";
    case BreachPolicy::Chunk: return "chunk";
  }
  return "unknown";
}

std::string to_string(EncodingKind kind) {
  return kind == EncodingKind::Text ? "text" : "binary";
}

std::string to_string(StoreMode mode) {
  switch (mode) {
    case StoreMode::SingleDocument: return "single_document";
    case StoreMode::ChunkedRecords: return "chunked_records";
    case StoreMode::AppendLog: return "append_log";
  }
  return "unknown";
}

std::optional<OverflowPolicy> parse_overflow_policy(const std::string& s) {
  if (s == "drop_newest") return OverflowPolicy::DropNewest;
  if (s == "drop_oldest") return OverflowPolicy::DropOldest;
  if (s == "backpressure") return OverflowPolicy::Backpressure;
  return std::nullopt;
}

std::optional<AggregationMode> parse_aggregation_mode(const std::string& s) {
  if (s == "off") return AggregationMode::Off;
  if (s == "collapse_repeats") return AggregationMode::CollapseRepeats;
  return std::nullopt;
}

std::optional<BreachPolicy> parse_breach_policy(const std::string& s) {
  if (s == "fail_hard") return BreachPolicy::FailHard;
  if (s == "prune_with_marker") return BreachPolicy::PruneWithMarker;
  if (s == "chunk") return BreachPolicy::Chunk;
  return std::nullopt;
}

std::optional<EncodingKind> parse_encoding_kind(const std::string& s) {
  if (s == "text") return EncodingKind::Text;
  if (s == "binary") return EncodingKind::Binary;
  return std::nullopt;
}

std::optional<StoreMode> parse_store_mode(const std::string& s) {
  if (s == "single_document") return StoreMode::SingleDocument;
  if (s == "chunked_records") return StoreMode::ChunkedRecords;
  if (s == "append_log") return StoreMode::AppendLog;
  return std::nullopt;
}

std::optional<Verdict> parse_verdict(const std::string& s) {
  if (s == "malicious") return Verdict::Malicious;
  if (s == "benign") return Verdict::Benign;
  return std::nullopt;
}

std::optional<ReportIntegrity> parse_report_integrity(const std::string& s) {
  if (s == "intact") return ReportIntegrity::Intact;
  if (s == "truncated_with_markers") return ReportIntegrity::TruncatedWithMarkers;
  if (s == "corrupted") return ReportIntegrity::Corrupted;
  if (s == "missing") return ReportIntegrity::Missing;
  return std::nullopt;
}

}  // namespace tca
