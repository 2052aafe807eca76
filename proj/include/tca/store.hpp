#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tca/codec.hpp"
#include "tca/doc_value.hpp"
#include "tca/process_tree.hpp"

namespace tca {

enum class StoreMode : uint8_t { SingleDocument, ChunkedRecords, AppendLog };

/// Caps of the modeled database backend. Documents are measured against
/// the Binary encoding, matching a BSON-style document store.
struct StoreLimits {
  uint64_t max_doc_bytes = 16 * 1024 * 1024;
  uint32_t max_doc_depth = 100;
  /// Applies to SingleDocument totals and to AppendLog file growth.
  std::optional<uint64_t> max_total_bytes;
  StoreMode mode = StoreMode::SingleDocument;

  bool valid() const { return max_doc_bytes > 0 && max_doc_depth > 0; }
};

enum class RejectReason : uint8_t { SizeCap, DepthCap, TotalCap };

std::string to_string(RejectReason reason);

struct InsertOutcome {
  enum class Status : uint8_t { Accepted, Rejected, SilentlyDropped };

  Status status = Status::Accepted;
  uint64_t doc_id = 0;                  // valid when Accepted
  std::optional<RejectReason> reason;   // set when Rejected

  bool accepted() const { return status == Status::Accepted; }

  static InsertOutcome accept(uint64_t id) { return {Status::Accepted, id, std::nullopt}; }
  static InsertOutcome reject(RejectReason r) { return {Status::Rejected, 0, r}; }
  static InsertOutcome dropped() { return {Status::SilentlyDropped, 0, std::nullopt}; }
};

/// Isolated append-only store that accepts every payload the main store
/// rejected. Never rejects anything itself.
class ForensicStore {
 public:
  struct Entry {
    int64_t timestamp = 0;
    std::vector<uint8_t> raw;
    std::string origin;
  };

  void append(int64_t timestamp, std::vector<uint8_t> raw, std::string origin);
  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  /// Optional persistence: one forensic/<seq>.raw file per entry.
  void persist_to(const std::filesystem::path& dir) const;

 private:
  std::vector<Entry> entries_;
};

struct QueryTreeResult {
  ReassembleResult reassembled;
  /// True when any record was rejected on insert or the reassembly found
  /// missing parents.
  bool partial = false;
};

/// In-memory capped document store with an optional directory-backed
/// persistence layout (store/<doc_id>.bin, store/log.jsonl). A single
/// writer is assumed; readers are safe between writes.
class DocumentStore {
 public:
  explicit DocumentStore(StoreLimits limits, ForensicStore* forensic = nullptr);

  const StoreLimits& limits() const { return limits_; }

  /// SingleDocument mode. Depth is checked before size; rejected documents
  /// are routed to the attached forensic store.
  InsertOutcome insert(const DocValue& doc, int64_t timestamp = 0);

  /// ChunkedRecords mode: every record is checked independently; one
  /// failure never aborts the rest.
  std::vector<InsertOutcome> insert_chunked(const std::vector<DocValue>& records,
                                            int64_t timestamp = 0);

  /// AppendLog mode: appends the text encoding of line_doc plus newline.
  /// Once the log has reached max_total_bytes with drop_when_behind set,
  /// further lines vanish silently (counted only internally).
  InsertOutcome append_log(const DocValue& line_doc, bool drop_when_behind,
                           int64_t timestamp = 0);

  /// ChunkedRecords mode: reassembles accepted event records into a tree.
  /// Summary and marker records are not tree nodes and are skipped.
  QueryTreeResult query_tree() const;

  const std::vector<DocValue>& documents() const { return docs_; }
  const std::vector<std::string>& log_lines() const { return log_; }
  uint64_t total_bytes() const { return total_bytes_; }
  uint64_t rejected_count() const { return rejected_; }
  uint64_t silent_drop_count() const { return silent_drops_; }

  /// Mirrors the in-memory state to disk, bit-exact with the in-memory
  /// encodings: store/<doc_id>.bin and store/log.jsonl under root.
  void persist_to(const std::filesystem::path& root) const;

 private:
  InsertOutcome check_and_store(const DocValue& doc, int64_t timestamp, bool enforce_total);

  StoreLimits limits_;
  ForensicStore* forensic_;
  std::vector<DocValue> docs_;
  std::vector<std::string> log_;
  uint64_t total_bytes_ = 0;
  uint64_t rejected_ = 0;
  uint64_t silent_drops_ = 0;
  uint64_t next_doc_id_ = 0;
};

}  // namespace tca
