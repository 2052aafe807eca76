#include "tca/codec.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include "emit.hpp"

namespace tca {

const char kTruncationMarkerKey[] = "__truncated__";

std::string to_string(FailReason reason) {
  switch (reason) {
    case FailReason::DepthExceeded: return "depth limit exceeded";
    case FailReason::SizeExceeded: return "size limit exceeded";
    case FailReason::RecursionLimit: return "Recursion limit reached";
  }
  return "unknown";
}

namespace {

struct CountingOut {
  uint64_t total = 0;
  void operator()(const uint8_t*, size_t n) { total += n; }
};

struct VectorOut {
  std::vector<uint8_t> bytes;
  void operator()(const uint8_t* data, size_t n) { bytes.insert(bytes.end(), data, data + n); }
};

}  // namespace

uint64_t measure_size(const DocValue& doc, EncodingKind kind) {
  CountingOut out;
  detail::emit_doc(doc, kind, out);
  return out.total;
}

std::vector<uint8_t> encode_unchecked(const DocValue& doc, EncodingKind kind) {
  VectorOut out;
  detail::emit_doc(doc, kind, out);
  return std::move(out.bytes);
}

DocValue make_truncation_marker(uint64_t removed) {
  return mapv({{kTruncationMarkerKey, DocValue::boolean(true)},
               {"removed", DocValue::integer(static_cast<int64_t>(removed))}});
}

bool is_truncation_marker(const DocValue& v) {
  // Marker records may carry extra context fields after the first two.
  if (v.kind() != DocValue::Kind::Map) return false;
  const auto& m = v.as_map();
  return m.size() >= 2 && m[0].key == kTruncationMarkerKey &&
         m[0].value.kind() == DocValue::Kind::Bool && m[0].value.as_bool() &&
         m[1].key == "removed" && m[1].value.kind() == DocValue::Kind::Int;
}

bool contains_truncation_marker(const DocValue& doc) {
  std::vector<const DocValue*> stack{&doc};
  while (!stack.empty()) {
    const DocValue* node = stack.back();
    stack.pop_back();
    if (is_truncation_marker(*node)) return true;
    if (node->kind() == DocValue::Kind::Array) {
      for (const auto& c : node->as_array()) stack.push_back(&c);
    } else if (node->kind() == DocValue::Kind::Map) {
      for (const auto& e : node->as_map()) stack.push_back(&e.value);
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Pruning

namespace {

struct PathStep {
  size_t index;  // child position (array element or map entry)
};

// Nodes reachable without entering marker subtrees, counted as original.
uint64_t count_original_nodes(const DocValue& doc) {
  uint64_t count = 0;
  std::vector<const DocValue*> stack{&doc};
  while (!stack.empty()) {
    const DocValue* node = stack.back();
    stack.pop_back();
    if (is_truncation_marker(*node)) continue;
    ++count;
    if (node->kind() == DocValue::Kind::Array) {
      for (const auto& c : node->as_array()) stack.push_back(&c);
    } else if (node->kind() == DocValue::Kind::Map) {
      for (const auto& e : node->as_map()) stack.push_back(&e.value);
    }
  }
  return count;
}

// Sum of "removed" counts over all markers inside the subtree.
uint64_t absorbed_marker_count(const DocValue& doc) {
  uint64_t sum = 0;
  std::vector<const DocValue*> stack{&doc};
  while (!stack.empty()) {
    const DocValue* node = stack.back();
    stack.pop_back();
    if (is_truncation_marker(*node)) {
      sum += static_cast<uint64_t>(node->as_map()[1].value.as_int());
      continue;
    }
    if (node->kind() == DocValue::Kind::Array) {
      for (const auto& c : node->as_array()) stack.push_back(&c);
    } else if (node->kind() == DocValue::Kind::Map) {
      for (const auto& e : node->as_map()) stack.push_back(&e.value);
    }
  }
  return sum;
}

const DocValue* child_at(const DocValue& node, size_t index) {
  if (node.kind() == DocValue::Kind::Array) return &node.as_array()[index];
  return &node.as_map()[index].value;
}

size_t child_count(const DocValue& node) {
  if (node.kind() == DocValue::Kind::Array) return node.as_array().size();
  if (node.kind() == DocValue::Kind::Map) return node.as_map().size();
  return 0;
}

// Subtree depth of every container, keyed by node address. One post-order
// pass; addresses are stable because the working document is not mutated
// while the map is alive.
void compute_depths(const DocValue& root, std::unordered_map<const DocValue*, uint64_t>& depths) {
  struct Item {
    const DocValue* node;
    bool expanded;
  };
  std::vector<Item> stack{{&root, false}};
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    if (item.node->is_scalar()) {
      depths[item.node] = 0;
      continue;
    }
    if (!item.expanded) {
      stack.push_back({item.node, true});
      for (size_t i = 0; i < child_count(*item.node); ++i) {
        stack.push_back({child_at(*item.node, i), false});
      }
      continue;
    }
    uint64_t deepest = 0;
    for (size_t i = 0; i < child_count(*item.node); ++i) {
      deepest = std::max(deepest, depths[child_at(*item.node, i)]);
    }
    depths[item.node] = 1 + deepest;
  }
}

// Path to the node at nesting level target_level on the deepest path,
// breaking depth ties toward the rightmost sibling. Root is level 0.
std::vector<PathStep> deepest_path_prefix(const DocValue& root, uint64_t target_level) {
  std::unordered_map<const DocValue*, uint64_t> depths;
  compute_depths(root, depths);
  std::vector<PathStep> path;
  const DocValue* node = &root;
  for (uint64_t level = 0; level < target_level; ++level) {
    size_t n = child_count(*node);
    size_t pick = n;
    uint64_t best = 0;
    for (size_t i = 0; i < n; ++i) {
      uint64_t d = depths[child_at(*node, i)];
      if (pick == n || d >= best) {
        pick = i;
        best = d;
      }
    }
    assert(pick != n && "deepest path shorter than target level");
    path.push_back({pick});
    node = child_at(*node, pick);
  }
  return path;
}

// Deepest non-marker node other than the root, ties broken toward the node
// later in document order (rightmost). Returns false when none exists.
bool deepest_removable(const DocValue& root, std::vector<PathStep>& out) {
  struct Item {
    const DocValue* node;
    std::vector<PathStep> path;
    uint64_t level;
  };
  bool found = false;
  uint64_t best_level = 0;
  // Document-order scan; >= keeps the latest (rightmost) among ties.
  std::vector<Item> stack{{&root, {}, 0}};
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    if (is_truncation_marker(*item.node)) continue;
    if (item.level > 0 && (!found || item.level >= best_level)) {
      found = true;
      best_level = item.level;
      out = item.path;
    }
    size_t n = child_count(*item.node);
    for (size_t i = n; i-- > 0;) {  // reversed push => left-to-right pop
      Item child{child_at(*item.node, i), item.path, item.level + 1};
      child.path.push_back({i});
      stack.push_back(std::move(child));
    }
  }
  return found;
}

DocValue rebuild_with_replacement(const DocValue& node, const std::vector<PathStep>& path,
                                  size_t at, DocValue replacement) {
  if (at == path.size()) return replacement;
  size_t idx = path[at].index;
  if (node.kind() == DocValue::Kind::Array) {
    DocValue::Array items = node.as_array();
    items[idx] = rebuild_with_replacement(items[idx], path, at + 1, std::move(replacement));
    return DocValue::array(std::move(items));
  }
  DocValue::Map entries = node.as_map();
  entries[idx].value =
      rebuild_with_replacement(entries[idx].value, path, at + 1, std::move(replacement));
  return DocValue::map(std::move(entries));
}

const DocValue* node_at(const DocValue& root, const std::vector<PathStep>& path) {
  const DocValue* node = &root;
  for (const auto& step : path) node = child_at(*node, step.index);
  return node;
}

bool is_plain_identifier(const std::string& key) {
  if (key.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(key[0])) && key[0] != '_') return false;
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

std::string render_step(const DocValue& parent, size_t index) {
  if (parent.kind() == DocValue::Kind::Array) {
    return "[" + std::to_string(index) + "]";
  }
  const std::string& key = parent.as_map()[index].key;
  if (is_plain_identifier(key)) return "." + key;
  std::string quoted = "[\"";
  for (char c : key) {
    if (c == '"' || c == '\\') quoted.push_back('\\');
    quoted.push_back(c);
  }
  quoted += "\"]";
  return quoted;
}

void collect_marker_paths(const DocValue& root, std::vector<std::string>& out) {
  struct Item {
    const DocValue* node;
    std::string path;
  };
  std::vector<Item> stack{{&root, "$"}};
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    if (is_truncation_marker(*item.node)) {
      out.push_back(item.path);
      continue;
    }
    for (size_t i = child_count(*item.node); i-- > 0;) {
      stack.push_back({child_at(*item.node, i), item.path + render_step(*item.node, i)});
    }
  }
}

}  // namespace

PruneResult prune_to_limits(const DocValue& doc, EncodingKind kind, const SerializerLimits& limits) {
  if (!limits.valid()) throw std::invalid_argument("invalid serializer limits");
  PruneResult result;
  DocValue work = doc;
  uint64_t iteration_guard = node_count(doc) + 1;

  while (true) {
    uint64_t depth = measure_depth(work);
    uint64_t size = measure_size(work, kind);
    if (depth <= limits.max_depth && size <= limits.max_bytes) break;
    if (iteration_guard-- == 0) {
      result.ok = false;
      result.reason = size > limits.max_bytes ? FailReason::SizeExceeded : FailReason::DepthExceeded;
      return result;
    }

    std::vector<PathStep> target;
    if (depth > limits.max_depth) {
      // Cut on the deepest path at the deepest level where a marker still
      // fits: level max_depth - 1. Level 0 would be the root itself.
      if (limits.max_depth < 2) {
        result.ok = false;
        result.reason = FailReason::DepthExceeded;
        return result;
      }
      target = deepest_path_prefix(work, limits.max_depth - 1);
    } else {
      if (!deepest_removable(work, target)) {
        result.ok = false;
        result.reason = FailReason::SizeExceeded;
        return result;
      }
    }

    const DocValue* victim = node_at(work, target);
    uint64_t removed_here = count_original_nodes(*victim);
    uint64_t absorbed = absorbed_marker_count(*victim);
    result.report.removed_events += removed_here;
    result.report.removed_subtrees += 1;
    work = rebuild_with_replacement(work, target, 0, make_truncation_marker(removed_here + absorbed));
  }

  collect_marker_paths(work, result.report.marker_paths);
  result.ok = true;
  result.pruned = std::move(work);
  return result;
}

SerializeOutcome encode(const DocValue& doc, EncodingKind kind, const SerializerLimits& limits) {
  if (!limits.valid()) throw std::invalid_argument("invalid serializer limits");
  uint64_t depth = measure_depth(doc);
  uint64_t size = measure_size(doc, kind);
  bool depth_ok = depth <= limits.max_depth;
  bool size_ok = size <= limits.max_bytes;
  if (depth_ok && size_ok) return SerializeOutcome::success(encode_unchecked(doc, kind));

  switch (limits.breach_policy) {
    case BreachPolicy::FailHard:
    case BreachPolicy::Chunk:
      // Chunking happens store-side; the encoder itself fails hard.
      return SerializeOutcome::failed(!depth_ok ? limits.depth_reason() : FailReason::SizeExceeded);
    case BreachPolicy::PruneWithMarker: {
      PruneResult pruned = prune_to_limits(doc, kind, limits);
      if (!pruned.ok) return SerializeOutcome::failed(pruned.reason);
      return SerializeOutcome::truncated(encode_unchecked(pruned.pruned, kind),
                                         std::move(pruned.report));
    }
  }
  return SerializeOutcome::failed(FailReason::SizeExceeded);
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

struct TextParser {
  const uint8_t* data;
  size_t size;
  size_t pos = 0;
  DecodeError error = {};
  bool failed = false;

  bool fail(const std::string& reason) {
    if (!failed) {
      failed = true;
      error = {pos, reason};
    }
    return false;
  }

  bool eof() const { return pos >= size; }
  uint8_t peek() const { return data[pos]; }

  void skip_ws() {
    while (!eof()) {
      uint8_t c = data[pos];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  }

  bool expect_literal(std::string_view lit) {
    if (size - pos < lit.size() || std::memcmp(data + pos, lit.data(), lit.size()) != 0) {
      return fail("invalid literal");
    }
    pos += lit.size();
    return true;
  }

  static int hex_value(uint8_t c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  bool parse_hex(int digits, uint32_t& out) {
    uint32_t v = 0;
    for (int i = 0; i < digits; ++i) {
      if (eof()) return fail("unexpected end of input in escape");
      int h = hex_value(data[pos]);
      if (h < 0) return fail("invalid hex digit");
      v = (v << 4) | static_cast<uint32_t>(h);
      ++pos;
    }
    out = v;
    return true;
  }

  void append_utf8(std::string& s, uint32_t cp) {
    if (cp < 0x80) {
      s.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      s.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      s.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  bool parse_string_body(std::string& out) {
    // opening quote already consumed
    while (true) {
      if (eof()) return fail("unterminated string");
      uint8_t c = data[pos];
      if (c == '"') {
        ++pos;
        return true;
      }
      if (c == '\\') {
        ++pos;
        if (eof()) return fail("unterminated escape");
        uint8_t e = data[pos];
        ++pos;
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case '/': out.push_back('/'); break;
          case 'b': out.push_back('\b'); break;
          case 'f': out.push_back('\f'); break;
          case 'n': out.push_back('\n'); break;
          case 'r': out.push_back('\r'); break;
          case 't': out.push_back('\t'); break;
          case 'x': {
            uint32_t v;
            if (!parse_hex(2, v)) return false;
            out.push_back(static_cast<char>(v));
            break;
          }
          case 'u': {
            uint32_t v;
            if (!parse_hex(4, v)) return false;
            if (v >= 0xD800 && v <= 0xDBFF) {
              if (size - pos < 6 || data[pos] != '\\' || data[pos + 1] != 'u') {
                return fail("unpaired surrogate");
              }
              pos += 2;
              uint32_t lo;
              if (!parse_hex(4, lo)) return false;
              if (lo < 0xDC00 || lo > 0xDFFF) return fail("invalid low surrogate");
              v = 0x10000 + ((v - 0xD800) << 10) + (lo - 0xDC00);
            } else if (v >= 0xDC00 && v <= 0xDFFF) {
              return fail("unpaired surrogate");
            }
            append_utf8(out, v);
            break;
          }
          default:
            return fail("unknown escape");
        }
        continue;
      }
      out.push_back(static_cast<char>(c));
      ++pos;
    }
  }

  bool parse_number(DocValue& out) {
    size_t start = pos;
    if (!eof() && data[pos] == '-') ++pos;
    bool is_float = false;
    while (!eof()) {
      uint8_t c = data[pos];
      if (c >= '0' && c <= '9') {
        ++pos;
      } else if (c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-') {
        if (c == '.' || c == 'e' || c == 'E') is_float = true;
        ++pos;
      } else {
        break;
      }
    }
    const char* begin = reinterpret_cast<const char*>(data + start);
    const char* end = reinterpret_cast<const char*>(data + pos);
    if (begin == end) return fail("empty number");
    if (is_float) {
      double d;
      auto res = std::from_chars(begin, end, d);
      if (res.ec != std::errc{} || res.ptr != end) return fail("invalid float");
      out = DocValue::real(d);
    } else {
      int64_t i;
      auto res = std::from_chars(begin, end, i);
      if (res.ec != std::errc{} || res.ptr != end) return fail("invalid integer");
      out = DocValue::integer(i);
    }
    return true;
  }

  bool parse_bytes(DocValue& out) {
    // leading 'b' consumed; expect quoted hex
    if (eof() || data[pos] != '"') return fail("expected '\"' after b");
    ++pos;
    std::vector<uint8_t> raw;
    while (true) {
      if (eof()) return fail("unterminated byte string");
      if (data[pos] == '"') {
        ++pos;
        break;
      }
      uint32_t v;
      if (!parse_hex(2, v)) return false;
      raw.push_back(static_cast<uint8_t>(v));
    }
    out = DocValue::bytes(std::move(raw));
    return true;
  }
};

struct TextFrame {
  bool is_map;
  DocValue::Array items;
  DocValue::Map entries;
  std::string pending_key;
};

DecodeResult decode_text(const uint8_t* data, size_t size) {
  TextParser p{data, size};
  std::vector<TextFrame> stack;
  std::optional<DocValue> finished;

  auto make_error = [&]() { return DecodeResult{std::nullopt, p.error}; };

  while (true) {
    if (finished.has_value()) {
      if (stack.empty()) {
        p.skip_ws();
        if (!p.eof()) {
          p.fail("trailing bytes after document");
          return make_error();
        }
        return DecodeResult{std::move(finished), std::nullopt};
      }
      TextFrame& top = stack.back();
      if (top.is_map) {
        top.entries.push_back({std::move(top.pending_key), std::move(*finished)});
      } else {
        top.items.push_back(std::move(*finished));
      }
      finished.reset();
      p.skip_ws();
      if (p.eof()) {
        p.fail("unterminated container");
        return make_error();
      }
      uint8_t c = p.peek();
      if (c == ',') {
        ++p.pos;
        if (top.is_map) {
          p.skip_ws();
          if (p.eof() || p.peek() != '"') {
            p.fail("expected map key");
            return make_error();
          }
          ++p.pos;
          std::string key;
          if (!p.parse_string_body(key)) return make_error();
          top.pending_key = std::move(key);
          p.skip_ws();
          if (p.eof() || p.peek() != ':') {
            p.fail("expected ':' after key");
            return make_error();
          }
          ++p.pos;
        }
        // fall through to parse the next value
      } else if (!top.is_map && c == ']') {
        ++p.pos;
        finished = DocValue::array(std::move(top.items));
        stack.pop_back();
        continue;
      } else if (top.is_map && c == '}') {
        ++p.pos;
        try {
          finished = DocValue::map(std::move(top.entries));
        } catch (const std::invalid_argument& e) {
          p.fail(e.what());
          return make_error();
        }
        stack.pop_back();
        continue;
      } else {
        p.fail("expected ',' or container close");
        return make_error();
      }
    }

    // parse one value (or handle an immediately-closed container)
    p.skip_ws();
    if (p.eof()) {
      p.fail("unexpected end of input");
      return make_error();
    }
    uint8_t c = p.peek();
    switch (c) {
      case 'n':
        if (!p.expect_literal("null")) return make_error();
        finished = DocValue::null();
        break;
      case 't':
        if (!p.expect_literal("true")) return make_error();
        finished = DocValue::boolean(true);
        break;
      case 'f':
        if (!p.expect_literal("false")) return make_error();
        finished = DocValue::boolean(false);
        break;
      case 'N':
        if (!p.expect_literal("NaN")) return make_error();
        finished = DocValue::real(std::numeric_limits<double>::quiet_NaN());
        break;
      case 'I':
        if (!p.expect_literal("Infinity")) return make_error();
        finished = DocValue::real(std::numeric_limits<double>::infinity());
        break;
      case 'b': {
        ++p.pos;
        DocValue v;
        if (!p.parse_bytes(v)) return make_error();
        finished = std::move(v);
        break;
      }
      case '"': {
        ++p.pos;
        std::string s;
        if (!p.parse_string_body(s)) return make_error();
        finished = DocValue::str(std::move(s));
        break;
      }
      case '[': {
        ++p.pos;
        p.skip_ws();
        if (!p.eof() && p.peek() == ']') {
          ++p.pos;
          finished = DocValue::array({});
        } else {
          stack.push_back({false, {}, {}, {}});
        }
        break;
      }
      case '{': {
        ++p.pos;
        p.skip_ws();
        if (!p.eof() && p.peek() == '}') {
          ++p.pos;
          finished = DocValue::map({});
        } else {
          if (p.eof() || p.peek() != '"') {
            p.fail("expected map key");
            return make_error();
          }
          ++p.pos;
          std::string key;
          if (!p.parse_string_body(key)) return make_error();
          p.skip_ws();
          if (p.eof() || p.peek() != ':') {
            p.fail("expected ':' after key");
            return make_error();
          }
          ++p.pos;
          stack.push_back({true, {}, {}, std::move(key)});
        }
        break;
      }
      default: {
        if (c == '-') {
          if (p.size - p.pos >= 9 &&
              std::memcmp(p.data + p.pos, "-Infinity", 9) == 0) {
            p.pos += 9;
            finished = DocValue::real(-std::numeric_limits<double>::infinity());
            break;
          }
        }
        if (c == '-' || (c >= '0' && c <= '9')) {
          DocValue v;
          if (!p.parse_number(v)) return make_error();
          finished = std::move(v);
        } else {
          p.fail("unexpected character");
          return make_error();
        }
      }
    }
  }
}

struct BinaryFrame {
  bool is_map;
  uint32_t remaining;
  DocValue::Array items;
  DocValue::Map entries;
  std::string pending_key;
  bool key_read = false;
};

DecodeResult decode_binary(const uint8_t* data, size_t size) {
  size_t pos = 0;
  auto error = [&](const std::string& reason) {
    return DecodeResult{std::nullopt, DecodeError{pos, reason}};
  };
  auto read_u32 = [&](uint32_t& v) {
    if (size - pos < 4) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data[pos + i]) << (8 * i);
    pos += 4;
    return true;
  };
  auto read_u64 = [&](uint64_t& v) {
    if (size - pos < 8) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data[pos + i]) << (8 * i);
    pos += 8;
    return true;
  };

  std::vector<BinaryFrame> stack;
  std::optional<DocValue> finished;

  while (true) {
    if (finished.has_value()) {
      if (stack.empty()) {
        if (pos != size) return error("trailing bytes after document");
        return DecodeResult{std::move(finished), std::nullopt};
      }
      BinaryFrame& top = stack.back();
      if (top.is_map) {
        top.entries.push_back({std::move(top.pending_key), std::move(*finished)});
        top.key_read = false;
      } else {
        top.items.push_back(std::move(*finished));
      }
      finished.reset();
      --top.remaining;
    }

    // close any completed containers
    if (!stack.empty() && stack.back().remaining == 0) {
      BinaryFrame top = std::move(stack.back());
      stack.pop_back();
      if (top.is_map) {
        try {
          finished = DocValue::map(std::move(top.entries));
        } catch (const std::invalid_argument& e) {
          return error(e.what());
        }
      } else {
        finished = DocValue::array(std::move(top.items));
      }
      continue;
    }
    if (finished.has_value()) continue;

    // map entries start with a key
    if (!stack.empty() && stack.back().is_map && !stack.back().key_read) {
      uint32_t len;
      if (!read_u32(len)) return error("unexpected end of input in key length");
      if (size - pos < len) return error("unexpected end of input in key");
      stack.back().pending_key.assign(reinterpret_cast<const char*>(data + pos), len);
      stack.back().key_read = true;
      pos += len;
    }

    if (pos >= size) return error("unexpected end of input");
    uint8_t tag = data[pos++];
    switch (tag) {
      case 0x00:
        finished = DocValue::null();
        break;
      case 0x01: {
        if (pos >= size) return error("unexpected end of input in bool");
        uint8_t b = data[pos++];
        if (b > 1) return error("invalid bool byte");
        finished = DocValue::boolean(b == 1);
        break;
      }
      case 0x02: {
        uint64_t v;
        if (!read_u64(v)) return error("unexpected end of input in int");
        finished = DocValue::integer(static_cast<int64_t>(v));
        break;
      }
      case 0x03: {
        uint64_t bits;
        if (!read_u64(bits)) return error("unexpected end of input in float");
        double d;
        std::memcpy(&d, &bits, 8);
        finished = DocValue::real(d);
        break;
      }
      case 0x04: {
        uint32_t len;
        if (!read_u32(len)) return error("unexpected end of input in string length");
        if (size - pos < len) return error("unexpected end of input in string");
        finished = DocValue::str(std::string(reinterpret_cast<const char*>(data + pos), len));
        pos += len;
        break;
      }
      case 0x05: {
        uint32_t len;
        if (!read_u32(len)) return error("unexpected end of input in bytes length");
        if (size - pos < len) return error("unexpected end of input in bytes");
        finished = DocValue::bytes(std::vector<uint8_t>(data + pos, data + pos + len));
        pos += len;
        break;
      }
      case 0x06: {
        uint32_t count;
        if (!read_u32(count)) return error("unexpected end of input in array count");
        if (count == 0) {
          finished = DocValue::array({});
        } else {
          BinaryFrame f{false, count, {}, {}, {}, false};
          f.items.reserve(std::min<uint32_t>(count, 4096));
          stack.push_back(std::move(f));
        }
        break;
      }
      case 0x07: {
        uint32_t count;
        if (!read_u32(count)) return error("unexpected end of input in map count");
        if (count == 0) {
          finished = DocValue::map({});
        } else {
          BinaryFrame f{true, count, {}, {}, {}, false};
          f.entries.reserve(std::min<uint32_t>(count, 4096));
          stack.push_back(std::move(f));
        }
        break;
      }
      default:
        --pos;
        return error("invalid type tag");
    }
  }
}

}  // namespace

DecodeResult decode(const uint8_t* data, size_t size, EncodingKind kind) {
  if (kind == EncodingKind::Text) return decode_text(data, size);
  return decode_binary(data, size);
}

DecodeResult decode(const std::vector<uint8_t>& bytes, EncodingKind kind) {
  return decode(bytes.data(), bytes.size(), kind);
}

// ---------------------------------------------------------------------------
// Marker path resolution

const DocValue* resolve_path(const DocValue& doc, const std::string& path) {
  if (path.empty() || path[0] != '$') return nullptr;
  const DocValue* node = &doc;
  size_t i = 1;
  while (i < path.size()) {
    if (path[i] == '.') {
      ++i;
      size_t start = i;
      while (i < path.size() && path[i] != '.' && path[i] != '[') ++i;
      std::string key = path.substr(start, i - start);
      node = node->find(key);
      if (node == nullptr) return nullptr;
    } else if (path[i] == '[') {
      ++i;
      if (i < path.size() && path[i] == '"') {
        ++i;
        std::string key;
        while (i < path.size() && path[i] != '"') {
          if (path[i] == '\\' && i + 1 < path.size()) ++i;
          key.push_back(path[i]);
          ++i;
        }
        if (i + 1 >= path.size() || path[i] != '"' || path[i + 1] != ']') return nullptr;
        i += 2;
        node = node->find(key);
        if (node == nullptr) return nullptr;
      } else {
        size_t start = i;
        while (i < path.size() && path[i] != ']') ++i;
        if (i >= path.size()) return nullptr;
        size_t index = 0;
        auto res = std::from_chars(path.data() + start, path.data() + i, index);
        if (res.ec != std::errc{} || res.ptr != path.data() + i) return nullptr;
        ++i;
        if (node->kind() != DocValue::Kind::Array || index >= node->as_array().size()) {
          return nullptr;
        }
        node = &node->as_array()[index];
      }
    } else {
      return nullptr;
    }
  }
  return node;
}

}  // namespace tca
