#include "tca/process_tree.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "tca/codec.hpp"

namespace tca {

namespace {
const std::vector<uint64_t> kNoChildren;
}

std::optional<ProcessTree> ProcessTree::build(std::vector<ProcessEvent> events) {
  ProcessTree tree;
  std::optional<uint64_t> root;
  for (auto& e : events) {
    if (tree.events_.count(e.event_id) != 0) return std::nullopt;  // duplicate id
    if (!e.parent_id.has_value()) {
      if (root.has_value()) return std::nullopt;  // two roots
      root = e.event_id;
    }
    tree.max_generation_ = std::max(tree.max_generation_, e.generation);
    tree.events_.emplace(e.event_id, std::move(e));
  }
  if (!root.has_value()) return std::nullopt;
  tree.root_id_ = *root;

  for (const auto& [id, e] : tree.events_) {
    if (!e.parent_id.has_value()) continue;
    auto parent = tree.events_.find(*e.parent_id);
    if (parent == tree.events_.end()) return std::nullopt;
    if (e.generation != parent->second.generation + 1) return std::nullopt;
    tree.children_[*e.parent_id].push_back(id);
  }
  for (auto& [id, kids] : tree.children_) std::sort(kids.begin(), kids.end());

  // Connectivity: every event reachable from the root.
  std::vector<uint64_t> frontier{tree.root_id_};
  size_t seen = 0;
  while (!frontier.empty()) {
    uint64_t id = frontier.back();
    frontier.pop_back();
    ++seen;
    for (uint64_t child : tree.children_of(id)) frontier.push_back(child);
  }
  if (seen != tree.events_.size()) return std::nullopt;
  return tree;
}

const ProcessEvent* ProcessTree::find_event(uint64_t id) const {
  auto it = events_.find(id);
  return it == events_.end() ? nullptr : &it->second;
}

const std::vector<uint64_t>& ProcessTree::children_of(uint64_t id) const {
  auto it = children_.find(id);
  return it == children_.end() ? kNoChildren : it->second;
}

namespace {

// Event ids level by level starting at the root (generation order).
std::vector<uint64_t> breadth_first_ids(const ProcessTree& tree) {
  std::vector<uint64_t> order;
  order.reserve(tree.size());
  order.push_back(tree.root_id());
  for (size_t i = 0; i < order.size(); ++i) {
    for (uint64_t child : tree.children_of(order[i])) order.push_back(child);
  }
  return order;
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

// Number of events in each subtree, one bottom-up pass.
std::unordered_map<uint64_t, uint64_t> subtree_sizes(const ProcessTree& tree,
                                                     const std::vector<uint64_t>& bfs) {
  std::unordered_map<uint64_t, uint64_t> sizes;
  sizes.reserve(tree.size());
  for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
    uint64_t total = 1;
    for (uint64_t child : tree.children_of(*it)) total += sizes[child];
    sizes[*it] = total;
  }
  return sizes;
}

}  // namespace

DocValue tree_to_nested_doc(const ProcessTree& tree) {
  // Bottom-up assembly over the reversed breadth-first order; no recursion,
  // so spawn chains deeper than the call stack still materialize.
  std::vector<uint64_t> bfs = breadth_first_ids(tree);
  std::unordered_map<uint64_t, DocValue> built;
  built.reserve(tree.size());
  for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
    const ProcessEvent& e = tree.event(*it);
    DocValue::Map m = process_map_head(e);
    DocValue::Array children;
    for (uint64_t child : tree.children_of(*it)) {
      children.push_back(std::move(built.at(child)));
      built.erase(child);
    }
    m.push_back({"children", DocValue::array(std::move(children))});
    built.emplace(*it, DocValue::map(std::move(m)));
  }
  return mapv({{"processes", std::move(built.at(tree.root_id()))}});
}

DocValue tree_to_nested_doc_limited(const ProcessTree& tree, uint64_t max_entries) {
  std::vector<uint64_t> bfs = breadth_first_ids(tree);
  auto sizes = subtree_sizes(tree, bfs);

  // Depth-first budget: selected entries form a preorder prefix, so each
  // children array is a fully-kept prefix followed by at most one marker.
  std::unordered_set<uint64_t> selected;
  selected.reserve(static_cast<size_t>(std::min<uint64_t>(max_entries, tree.size())));
  uint64_t budget = max_entries;
  std::vector<uint64_t> dfs{tree.root_id()};
  while (!dfs.empty() && budget > 0) {
    uint64_t id = dfs.back();
    dfs.pop_back();
    selected.insert(id);
    --budget;
    const auto& kids = tree.children_of(id);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) dfs.push_back(*it);
  }

  if (selected.count(tree.root_id()) == 0) {
    // Budget zero: nothing materialized beyond a lone marker.
    return mapv({{"processes", make_truncation_marker(tree.size())}});
  }

  std::unordered_map<uint64_t, DocValue> built;
  for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
    if (selected.count(*it) == 0) continue;
    const ProcessEvent& e = tree.event(*it);
    DocValue::Map m = process_map_head(e);
    DocValue::Array children;
    uint64_t omitted = 0;
    for (uint64_t child : tree.children_of(*it)) {
      if (selected.count(child) != 0) {
        children.push_back(std::move(built.at(child)));
        built.erase(child);
      } else {
        omitted += sizes.at(child);
      }
    }
    if (omitted > 0) children.push_back(make_truncation_marker(omitted));
    m.push_back({"children", DocValue::array(std::move(children))});
    built.emplace(*it, DocValue::map(std::move(m)));
  }
  return mapv({{"processes", std::move(built.at(tree.root_id()))}});
}

DocValue event_to_flat_record(const ProcessEvent& e) {
  DocValue::Map m;
  m.push_back({"id", DocValue::integer(static_cast<int64_t>(e.event_id))});
  if (e.parent_id.has_value()) {
    m.push_back({"parent_id", DocValue::integer(static_cast<int64_t>(*e.parent_id))});
  }
  m.push_back({"generation", DocValue::integer(e.generation)});
  m.push_back({"timestamp", DocValue::integer(e.timestamp)});
  DocValue::Array args;
  args.reserve(e.args.size());
  for (const auto& a : e.args) args.push_back(DocValue::str(a));
  m.push_back({"args", DocValue::array(std::move(args))});
  m.push_back({"payload", DocValue::boolean(e.is_terminal_payload)});
  return DocValue::map(std::move(m));
}

std::vector<DocValue> tree_to_flat_records(const ProcessTree& tree) {
  std::vector<const ProcessEvent*> ordered;
  ordered.reserve(tree.size());
  for (const auto& [id, e] : tree.events()) ordered.push_back(&e);
  std::sort(ordered.begin(), ordered.end(), [](const ProcessEvent* a, const ProcessEvent* b) {
    if (a->generation != b->generation) return a->generation < b->generation;
    return a->event_id < b->event_id;
  });
  std::vector<DocValue> records;
  records.reserve(ordered.size());
  for (const ProcessEvent* e : ordered) records.push_back(event_to_flat_record(*e));
  return records;
}

std::optional<ProcessEvent> flat_record_to_event(const DocValue& record) {
  if (record.kind() != DocValue::Kind::Map) return std::nullopt;
  const DocValue* id = record.find("id");
  const DocValue* generation = record.find("generation");
  const DocValue* timestamp = record.find("timestamp");
  const DocValue* args = record.find("args");
  const DocValue* payload = record.find("payload");
  if (id == nullptr || id->kind() != DocValue::Kind::Int) return std::nullopt;
  if (generation == nullptr || generation->kind() != DocValue::Kind::Int ||
      generation->as_int() < 0) {
    return std::nullopt;
  }
  if (timestamp == nullptr || timestamp->kind() != DocValue::Kind::Int) return std::nullopt;
  if (args == nullptr || args->kind() != DocValue::Kind::Array) return std::nullopt;
  if (payload == nullptr || payload->kind() != DocValue::Kind::Bool) return std::nullopt;

  ProcessEvent e;
  e.event_id = static_cast<uint64_t>(id->as_int());
  if (const DocValue* parent = record.find("parent_id")) {
    if (parent->kind() != DocValue::Kind::Int) return std::nullopt;
    e.parent_id = static_cast<uint64_t>(parent->as_int());
  }
  e.generation = static_cast<uint32_t>(generation->as_int());
  e.timestamp = timestamp->as_int();
  for (const auto& a : args->as_array()) {
    if (a.kind() != DocValue::Kind::Str) return std::nullopt;
    e.args.push_back(a.as_str());
  }
  e.is_terminal_payload = payload->as_bool();
  return e;
}

ReassembleResult reassemble_tree(const std::vector<DocValue>& records) {
  ReassembleResult result;
  std::unordered_map<uint64_t, ProcessEvent> by_id;
  by_id.reserve(records.size());
  for (const auto& record : records) {
    auto event = flat_record_to_event(record);
    if (!event.has_value() || by_id.count(event->event_id) != 0) {
      ++result.malformed_records;
      continue;
    }
    by_id.emplace(event->event_id, std::move(*event));
  }

  std::unordered_set<uint64_t> missing;
  std::optional<uint64_t> root;
  std::unordered_map<uint64_t, std::vector<uint64_t>> kids;
  for (const auto& [id, e] : by_id) {
    if (!e.parent_id.has_value()) {
      if (!root.has_value()) root = id;
      continue;
    }
    if (by_id.count(*e.parent_id) == 0) {
      missing.insert(*e.parent_id);
    } else {
      kids[*e.parent_id].push_back(id);
    }
  }
  result.missing_parents.assign(missing.begin(), missing.end());
  std::sort(result.missing_parents.begin(), result.missing_parents.end());

  if (!root.has_value()) return result;

  // Keep only the component reachable from the root; orphan chains stay out
  // of the tree but are already accounted for through missing_parents.
  std::vector<ProcessEvent> reachable;
  std::vector<uint64_t> frontier{*root};
  while (!frontier.empty()) {
    uint64_t id = frontier.back();
    frontier.pop_back();
    reachable.push_back(by_id.at(id));
    auto it = kids.find(id);
    if (it != kids.end()) {
      for (uint64_t child : it->second) frontier.push_back(child);
    }
  }
  result.unreachable_records = by_id.size() - reachable.size();
  result.tree = ProcessTree::build(std::move(reachable));
  if (!result.tree.has_value()) ++result.malformed_records;
  return result;
}

}  // namespace tca
