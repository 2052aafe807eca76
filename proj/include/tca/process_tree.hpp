#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tca/doc_value.hpp"

namespace tca {

/// One spawn observation. The generation counter is the depth value the
/// spawner propagates from parent to child.
struct ProcessEvent {
  uint64_t event_id = 0;
  std::optional<uint64_t> parent_id;
  uint32_t generation = 0;
  int64_t timestamp = 0;
  std::vector<std::string> args;
  bool is_terminal_payload = false;

  bool operator==(const ProcessEvent&) const = default;
};

/// Rooted spawn tree with ordered children. Immutable once built.
class ProcessTree {
 public:
  ProcessTree() = default;

  /// Builds a tree from events; returns nullopt unless exactly one root
  /// exists, every parent reference resolves, and generations increment by
  /// one along every edge.
  static std::optional<ProcessTree> build(std::vector<ProcessEvent> events);

  uint64_t root_id() const { return root_id_; }
  const ProcessEvent& root() const { return events_.at(root_id_); }
  const ProcessEvent& event(uint64_t id) const { return events_.at(id); }
  const ProcessEvent* find_event(uint64_t id) const;
  const std::vector<uint64_t>& children_of(uint64_t id) const;
  const std::map<uint64_t, ProcessEvent>& events() const { return events_; }
  size_t size() const { return events_.size(); }
  uint32_t max_generation() const { return max_generation_; }

  bool operator==(const ProcessTree&) const = default;

 private:
  uint64_t root_id_ = 0;
  std::map<uint64_t, ProcessEvent> events_;
  std::map<uint64_t, std::vector<uint64_t>> children_;
  uint32_t max_generation_ = 0;
};

/// Single-document materialization: Map{"processes": <root>} where every
/// process is Map{"id", "timestamp", ["args"], ["payload"], "children"}.
/// args appears when non-empty, payload when true; child order preserved.
/// A chain of k processes measures 2k + 1 deep including the wrapper.
DocValue tree_to_nested_doc(const ProcessTree& tree);

/// Same shape but materializes at most max_entries process nodes
/// (depth-first, children in order); omitted subtrees collapse into
/// truncation markers placed in the children array where the cut happened.
DocValue tree_to_nested_doc_limited(const ProcessTree& tree, uint64_t max_entries);

/// Chunked materialization: one flat record per event, ordered by
/// (generation, event_id), every record at most 3 levels deep. Lossless:
/// reassemble_tree inverts it.
std::vector<DocValue> tree_to_flat_records(const ProcessTree& tree);

/// Flat record for one event, as emitted by tree_to_flat_records.
DocValue event_to_flat_record(const ProcessEvent& event);
/// Parses a flat record back; nullopt when required fields are missing or
/// have the wrong type.
std::optional<ProcessEvent> flat_record_to_event(const DocValue& record);

struct ReassembleResult {
  /// Tree rebuilt from the records that connect to the root; empty when no
  /// root record was present.
  std::optional<ProcessTree> tree;
  /// Parent ids referenced by some record but absent from the record set —
  /// the signature of a truncated chunk set.
  std::vector<uint64_t> missing_parents;
  /// Records skipped because they could not be parsed as events.
  uint64_t malformed_records = 0;
  /// Well-formed records that do not connect to the root (orphan
  /// descendants, stray extra roots).
  uint64_t unreachable_records = 0;

  bool complete() const {
    return tree.has_value() && missing_parents.empty() && malformed_records == 0 &&
           unreachable_records == 0;
  }
};

/// Rebuilds a tree from flat records in any order. Orphaned records (parent
/// missing) are reported via missing_parents and a partial tree is still
/// returned, so partial chunk sets stay usable.
ReassembleResult reassemble_tree(const std::vector<DocValue>& records);

}  // namespace tca
