#include "tca/doc_value.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_set>

namespace tca {

DocValue::DocValue(FromMapTag, Map m) : value_(std::move(m)) {}

DocValue DocValue::map(Map entries) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(entries.size());
  for (const auto& e : entries) {
    if (!seen.insert(e.key).second) {
      throw std::invalid_argument("duplicate map key: " + e.key);
    }
  }
  return DocValue(FromMapTag{}, std::move(entries));
}

const DocValue::Map& DocValue::as_map() const { return std::get<Map>(value_); }

const DocValue* DocValue::find(std::string_view key) const {
  if (kind() != Kind::Map) return nullptr;
  for (const auto& e : as_map()) {
    if (e.key == key) return &e.value;
  }
  return nullptr;
}

DocValue mapv(std::initializer_list<std::pair<std::string, DocValue>> entries) {
  DocValue::Map m;
  m.reserve(entries.size());
  for (const auto& [k, v] : entries) m.push_back({k, v});
  return DocValue::map(std::move(m));
}

namespace {

bool scalar_equal(const DocValue& a, const DocValue& b) {
  switch (a.kind()) {
    case DocValue::Kind::Null:
      return true;
    case DocValue::Kind::Bool:
      return a.as_bool() == b.as_bool();
    case DocValue::Kind::Int:
      return a.as_int() == b.as_int();
    case DocValue::Kind::Float: {
      // Bit-level comparison: round-trip identity must hold for -0.0 and NaN.
      double x = a.as_float(), y = b.as_float();
      uint64_t xb, yb;
      static_assert(sizeof(double) == sizeof(uint64_t));
      std::memcpy(&xb, &x, 8);
      std::memcpy(&yb, &y, 8);
      return xb == yb;
    }
    case DocValue::Kind::Str:
      return a.as_str() == b.as_str();
    case DocValue::Kind::Bytes:
      return a.as_bytes() == b.as_bytes();
    default:
      return false;
  }
}

}  // namespace

bool operator==(const DocValue& a, const DocValue& b) {
  // Explicit work list instead of recursion: documents may be deeper than
  // the call stack tolerates.
  std::vector<std::pair<const DocValue*, const DocValue*>> work;
  work.push_back({&a, &b});
  while (!work.empty()) {
    auto [x, y] = work.back();
    work.pop_back();
    if (x->kind() != y->kind()) return false;
    switch (x->kind()) {
      case DocValue::Kind::Array: {
        const auto& xa = x->as_array();
        const auto& ya = y->as_array();
        if (xa.size() != ya.size()) return false;
        for (size_t i = 0; i < xa.size(); ++i) work.push_back({&xa[i], &ya[i]});
        break;
      }
      case DocValue::Kind::Map: {
        const auto& xm = x->as_map();
        const auto& ym = y->as_map();
        if (xm.size() != ym.size()) return false;
        for (size_t i = 0; i < xm.size(); ++i) {
          if (xm[i].key != ym[i].key) return false;
          work.push_back({&xm[i].value, &ym[i].value});
        }
        break;
      }
      default:
        if (!scalar_equal(*x, *y)) return false;
    }
  }
  return true;
}

uint64_t measure_depth(const DocValue& doc) {
  if (doc.is_scalar()) return 0;
  // DFS with an explicit stack carrying the nesting level of each container.
  uint64_t deepest = 0;
  std::vector<std::pair<const DocValue*, uint64_t>> stack;
  stack.push_back({&doc, 1});
  while (!stack.empty()) {
    auto [node, level] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, level);
    if (node->kind() == DocValue::Kind::Array) {
      for (const auto& child : node->as_array()) {
        if (child.is_container()) stack.push_back({&child, level + 1});
      }
    } else if (node->kind() == DocValue::Kind::Map) {
      for (const auto& e : node->as_map()) {
        if (e.value.is_container()) stack.push_back({&e.value, level + 1});
      }
    }
  }
  return deepest;
}

uint64_t node_count(const DocValue& doc) {
  uint64_t count = 0;
  std::vector<const DocValue*> stack{&doc};
  while (!stack.empty()) {
    const DocValue* node = stack.back();
    stack.pop_back();
    ++count;
    if (node->kind() == DocValue::Kind::Array) {
      for (const auto& child : node->as_array()) stack.push_back(&child);
    } else if (node->kind() == DocValue::Kind::Map) {
      for (const auto& e : node->as_map()) stack.push_back(&e.value);
    }
  }
  return count;
}

}  // namespace tca
