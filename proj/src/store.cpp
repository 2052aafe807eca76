#include "tca/store.hpp"

#include <fstream>
#include <stdexcept>

namespace tca {

std::string to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::SizeCap: return "SizeCap";
    case RejectReason::DepthCap: return "DepthCap";
    case RejectReason::TotalCap: return "TotalCap";
  }
  return "unknown";
}

void ForensicStore::append(int64_t timestamp, std::vector<uint8_t> raw, std::string origin) {
  entries_.push_back({timestamp, std::move(raw), std::move(origin)});
}

void ForensicStore::persist_to(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (size_t i = 0; i < entries_.size(); ++i) {
    std::ofstream out(dir / (std::to_string(i) + ".raw"), std::ios::binary);
    out.write(reinterpret_cast<const char*>(entries_[i].raw.data()),
              static_cast<std::streamsize>(entries_[i].raw.size()));
  }
}

DocumentStore::DocumentStore(StoreLimits limits, ForensicStore* forensic)
    : limits_(limits), forensic_(forensic) {
  if (!limits_.valid()) throw std::invalid_argument("invalid store limits");
}

InsertOutcome DocumentStore::check_and_store(const DocValue& doc, int64_t timestamp,
                                             bool enforce_total) {
  auto reject = [&](RejectReason reason) {
    ++rejected_;
    if (forensic_ != nullptr) {
      forensic_->append(timestamp, encode_unchecked(doc, EncodingKind::Binary),
                        "store-reject:" + to_string(reason));
    }
    return InsertOutcome::reject(reason);
  };

  if (measure_depth(doc) > limits_.max_doc_depth) return reject(RejectReason::DepthCap);
  uint64_t size = measure_size(doc, EncodingKind::Binary);
  if (size > limits_.max_doc_bytes) return reject(RejectReason::SizeCap);
  if (enforce_total && limits_.max_total_bytes.has_value() &&
      total_bytes_ + size > *limits_.max_total_bytes) {
    return reject(RejectReason::TotalCap);
  }

  docs_.push_back(doc);
  total_bytes_ += size;
  return InsertOutcome::accept(next_doc_id_++);
}

InsertOutcome DocumentStore::insert(const DocValue& doc, int64_t timestamp) {
  if (limits_.mode != StoreMode::SingleDocument) {
    throw std::logic_error("insert requires SingleDocument mode");
  }
  return check_and_store(doc, timestamp, /*enforce_total=*/true);
}

std::vector<InsertOutcome> DocumentStore::insert_chunked(const std::vector<DocValue>& records,
                                                         int64_t timestamp) {
  if (limits_.mode != StoreMode::ChunkedRecords) {
    throw std::logic_error("insert_chunked requires ChunkedRecords mode");
  }
  std::vector<InsertOutcome> outcomes;
  outcomes.reserve(records.size());
  // No running-total cap here: acceptance of a record must not depend on
  // insert order, so only per-record caps apply.
  for (const auto& record : records) {
    outcomes.push_back(check_and_store(record, timestamp, /*enforce_total=*/false));
  }
  return outcomes;
}

InsertOutcome DocumentStore::append_log(const DocValue& line_doc, bool drop_when_behind,
                                        int64_t timestamp) {
  if (limits_.mode != StoreMode::AppendLog) {
    throw std::logic_error("append_log requires AppendLog mode");
  }
  (void)timestamp;
  if (drop_when_behind && limits_.max_total_bytes.has_value() &&
      total_bytes_ >= *limits_.max_total_bytes) {
    // Modeled silent loss: nothing lands anywhere, only the internal
    // counter (invisible to any report) moves.
    ++silent_drops_;
    return InsertOutcome::dropped();
  }
  std::vector<uint8_t> bytes = encode_unchecked(line_doc, EncodingKind::Text);
  std::string line(bytes.begin(), bytes.end());
  line.push_back('\n');
  total_bytes_ += line.size();
  log_.push_back(std::move(line));
  docs_.push_back(line_doc);
  return InsertOutcome::accept(next_doc_id_++);
}

QueryTreeResult DocumentStore::query_tree() const {
  if (limits_.mode != StoreMode::ChunkedRecords) {
    throw std::logic_error("query_tree requires ChunkedRecords mode");
  }
  std::vector<DocValue> event_records;
  event_records.reserve(docs_.size());
  for (const auto& doc : docs_) {
    if (doc.find("summary") != nullptr || is_truncation_marker(doc) ||
        doc.find(kTruncationMarkerKey) != nullptr) {
      continue;
    }
    event_records.push_back(doc);
  }
  QueryTreeResult result;
  result.reassembled = reassemble_tree(event_records);
  result.partial = rejected_ > 0 || !result.reassembled.missing_parents.empty() ||
                   result.reassembled.malformed_records > 0 ||
                   result.reassembled.unreachable_records > 0 ||
                   !result.reassembled.tree.has_value();
  return result;
}

void DocumentStore::persist_to(const std::filesystem::path& root) const {
  std::filesystem::path store_dir = root / "store";
  std::filesystem::create_directories(store_dir);
  if (limits_.mode == StoreMode::AppendLog) {
    std::ofstream out(store_dir / "log.jsonl", std::ios::binary);
    for (const auto& line : log_) out.write(line.data(), static_cast<std::streamsize>(line.size()));
    return;
  }
  for (size_t i = 0; i < docs_.size(); ++i) {
    std::vector<uint8_t> bytes = encode_unchecked(docs_[i], EncodingKind::Binary);
    std::ofstream out(store_dir / (std::to_string(i) + ".bin"), std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
}

}  // namespace tca
