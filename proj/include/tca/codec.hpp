#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tca/doc_value.hpp"

namespace tca {

/// The two encoding families the pipeline models.
///
/// Text is a JSON-style UTF-8 encoding extended with b"<hex>" byte strings
/// and \xNN escapes for non-UTF-8 bytes, so every DocValue round-trips.
/// Binary is a length-prefixed tagged format: one type tag byte, 4-byte
/// little-endian counts/lengths for containers, strings and byte strings,
/// 8-byte little-endian integers and IEEE-754 doubles.
enum class EncodingKind : uint8_t { Text, Binary };

enum class BreachPolicy : uint8_t { FailHard, PruneWithMarker, Chunk };

enum class FailReason : uint8_t { DepthExceeded, SizeExceeded, RecursionLimit };

std::string to_string(FailReason reason);

struct SerializerLimits {
  uint32_t max_depth = 100;
  uint64_t max_bytes = 16 * 1024 * 1024;
  BreachPolicy breach_policy = BreachPolicy::FailHard;
  /// When set, depth breaches surface as RecursionLimit instead of
  /// DepthExceeded, emulating an encoder whose only depth bound is its own
  /// recursion guard. The numeric check is identical.
  bool recursion_guard = false;

  bool valid() const { return max_depth >= 1 && max_bytes >= 64; }

  FailReason depth_reason() const {
    return recursion_guard ? FailReason::RecursionLimit : FailReason::DepthExceeded;
  }
};

/// Accounting for PruneWithMarker outcomes. removed_events counts document
/// nodes that were cut (markers themselves excluded); marker_paths point at
/// the markers present in the final output.
struct TruncationReport {
  uint64_t removed_subtrees = 0;
  uint64_t removed_events = 0;
  std::vector<std::string> marker_paths;
};

struct SerializeOutcome {
  enum class Status : uint8_t { Ok, OkTruncated, Failed };

  Status status = Status::Ok;
  std::vector<uint8_t> bytes;
  std::optional<TruncationReport> truncation;
  std::optional<FailReason> reason;

  bool ok() const { return status != Status::Failed; }

  static SerializeOutcome success(std::vector<uint8_t> b) {
    return {Status::Ok, std::move(b), std::nullopt, std::nullopt};
  }
  static SerializeOutcome truncated(std::vector<uint8_t> b, TruncationReport r) {
    return {Status::OkTruncated, std::move(b), std::move(r), std::nullopt};
  }
  static SerializeOutcome failed(FailReason r) {
    return {Status::Failed, {}, std::nullopt, r};
  }
};

/// Exact encoded length in bytes of encode(doc, kind), computed by a
/// streaming count that never materializes the encoding.
uint64_t measure_size(const DocValue& doc, EncodingKind kind);

/// Unconditional encoding with no limit checks. Building block for encode()
/// and for stages that enforce their own caps.
std::vector<uint8_t> encode_unchecked(const DocValue& doc, EncodingKind kind);

/// Batch encoder under depth/size budgets.
///
/// FailHard (and Chunk, which is a store-side policy) reject documents that
/// violate either limit, depth checked first. PruneWithMarker cuts subtrees
/// deepest-first until the document fits and reports what was removed.
SerializeOutcome encode(const DocValue& doc, EncodingKind kind, const SerializerLimits& limits);

/// Marker inserted wherever PruneWithMarker removed a subtree:
/// Map{"__truncated__": true, "removed": n}.
extern const char kTruncationMarkerKey[];
DocValue make_truncation_marker(uint64_t removed);
bool is_truncation_marker(const DocValue& v);
/// True when any truncation marker occurs anywhere in the document.
bool contains_truncation_marker(const DocValue& doc);

struct PruneResult {
  bool ok = false;
  DocValue pruned;
  TruncationReport report;
  FailReason reason = FailReason::SizeExceeded;  // set when !ok
};

/// Deepest-first subtree removal (ties: rightmost sibling first) until both
/// limits hold. Each removed subtree becomes one marker; markers swallowed
/// by a later, shallower cut fold their counts into the new marker. The
/// document root is never replaced, so a root whose marker-only skeleton
/// still violates a limit fails with the corresponding reason.
PruneResult prune_to_limits(const DocValue& doc, EncodingKind kind, const SerializerLimits& limits);

struct DecodeError {
  uint64_t position = 0;
  std::string reason;
};

struct DecodeResult {
  std::optional<DocValue> value;
  std::optional<DecodeError> error;

  bool ok() const { return value.has_value(); }
};

/// Total inverse of encode for Ok/OkTruncated outputs; malformed or
/// truncated input yields MalformedInput-style position + reason.
DecodeResult decode(const std::vector<uint8_t>& bytes, EncodingKind kind);
DecodeResult decode(const uint8_t* data, size_t size, EncodingKind kind);

/// Resolves a marker path ("$.a[2].b") produced by prune_to_limits.
/// Returns nullptr when the path does not resolve.
const DocValue* resolve_path(const DocValue& doc, const std::string& path);

}  // namespace tca
