#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace tca {

/// Generic nested document value: the unit every pipeline stage consumes.
///
/// A value is one of Null, Bool, Int, Float, Str, Bytes, Array or Map.
/// Maps preserve insertion order and reject duplicate keys. Values are
/// immutable after construction, so they can be shared freely across
/// concurrent readers.
class DocValue {
 public:
  enum class Kind : uint8_t { Null, Bool, Int, Float, Str, Bytes, Array, Map };

  using Array = std::vector<DocValue>;
  struct MapEntry;
  using Map = std::vector<MapEntry>;

  DocValue() : value_(std::monostate{}) {}

  static DocValue null() { return DocValue(); }
  static DocValue boolean(bool b) { return DocValue(b); }
  static DocValue integer(int64_t i) { return DocValue(i); }
  static DocValue real(double d) { return DocValue(d); }
  static DocValue str(std::string s) { return DocValue(std::move(s)); }
  static DocValue bytes(std::vector<uint8_t> b) { return DocValue(std::move(b)); }
  static DocValue array(Array items) { return DocValue(std::move(items)); }
  /// Throws std::invalid_argument if two entries share a key.
  static DocValue map(Map entries);

  Kind kind() const { return static_cast<Kind>(value_.index()); }
  bool is_scalar() const { return kind() != Kind::Array && kind() != Kind::Map; }
  bool is_container() const { return !is_scalar(); }

  bool as_bool() const { return std::get<bool>(value_); }
  int64_t as_int() const { return std::get<int64_t>(value_); }
  double as_float() const { return std::get<double>(value_); }
  const std::string& as_str() const { return std::get<std::string>(value_); }
  const std::vector<uint8_t>& as_bytes() const { return std::get<std::vector<uint8_t>>(value_); }
  const Array& as_array() const { return std::get<Array>(value_); }
  const Map& as_map() const;

  /// Map lookup by key; nullptr when absent or when this is not a Map.
  const DocValue* find(std::string_view key) const;

  friend bool operator==(const DocValue& a, const DocValue& b);
  friend bool operator!=(const DocValue& a, const DocValue& b) { return !(a == b); }

 private:
  explicit DocValue(bool b) : value_(b) {}
  explicit DocValue(int64_t i) : value_(i) {}
  explicit DocValue(double d) : value_(d) {}
  explicit DocValue(std::string s) : value_(std::move(s)) {}
  explicit DocValue(std::vector<uint8_t> b) : value_(std::move(b)) {}
  explicit DocValue(Array a) : value_(std::move(a)) {}

  struct FromMapTag {};
  DocValue(FromMapTag, Map m);

  std::variant<std::monostate, bool, int64_t, double, std::string,
               std::vector<uint8_t>, Array, Map>
      value_;
};

struct DocValue::MapEntry {
  std::string key;
  DocValue value;
};

/// Convenience builder for ordered maps: mapv({{"a", DocValue::integer(1)}}).
DocValue mapv(std::initializer_list<std::pair<std::string, DocValue>> entries);

/// Nesting depth: scalars are 0, containers are 1 + max over children
/// (an empty container is 1). Iterative, so adversarially deep documents
/// cannot blow the call stack.
uint64_t measure_depth(const DocValue& doc);

/// Total number of nodes in the document tree, counting every scalar,
/// array and map as one node.
uint64_t node_count(const DocValue& doc);

}  // namespace tca
