#include "tca/codec.hpp"

#include <cmath>
#include <string>

#include "doctest.h"
#include "support/oracle_codec.hpp"
#include "support/random_docs.hpp"

using namespace tca;
using namespace tca::testing;

namespace {

std::string as_text(const std::vector<uint8_t>& bytes) {
  return std::string(bytes.begin(), bytes.end());
}

DocValue sample_doc() {
  return mapv({
      {"null", DocValue::null()},
      {"flag", DocValue::boolean(true)},
      {"count", DocValue::integer(-42)},
      {"ratio", DocValue::real(2.5)},
      {"name", DocValue::str("a\"b\\c\nd")},
      {"blob", DocValue::bytes({0x00, 0xFF, 0x10})},
      {"list", DocValue::array({DocValue::integer(1), DocValue::str("x")})},
      {"nested", mapv({{"inner", DocValue::array({})}})},
  });
}

DocValue nested_chain(uint32_t containers) {
  DocValue node = DocValue::array({});
  for (uint32_t i = 1; i < containers; ++i) node = DocValue::array({std::move(node)});
  return node;
}

SerializerLimits lax_limits() {
  SerializerLimits limits;
  limits.max_depth = 100000;
  limits.max_bytes = 1ULL << 40;
  return limits;
}

}  // namespace

TEST_CASE("text encoding golden") {
  CHECK(as_text(encode_unchecked(DocValue::null(), EncodingKind::Text)) == "null");
  CHECK(as_text(encode_unchecked(sample_doc(), EncodingKind::Text)) ==
        "{\"null\":null,\"flag\":true,\"count\":-42,\"ratio\":2.5,"
        "\"name\":\"a\\\"b\\\\c\\nd\",\"blob\":b\"00ff10\","
        "\"list\":[1,\"x\"],\"nested\":{\"inner\":[]}}");
  CHECK(as_text(encode_unchecked(DocValue::real(1.0), EncodingKind::Text)) == "1.0");
  CHECK(as_text(encode_unchecked(DocValue::real(-0.0), EncodingKind::Text)) == "-0.0");
}

TEST_CASE("binary encoding golden") {
  // {"a": 1} => map tag, entry count, key length + key, int tag + 8-byte value
  std::vector<uint8_t> expected = {0x07, 0x01, 0x00, 0x00, 0x00, 0x01, 0x00,
                                   0x00, 0x00, 'a',  0x02, 0x01, 0x00, 0x00,
                                   0x00, 0x00, 0x00, 0x00, 0x00};
  CHECK(encode_unchecked(mapv({{"a", DocValue::integer(1)}}), EncodingKind::Binary) == expected);
}

TEST_CASE("measure_size of the null literal") {
  CHECK(measure_size(DocValue::null(), EncodingKind::Text) == 4);
  CHECK(measure_size(DocValue::null(), EncodingKind::Binary) == 1);
}

TEST_CASE("measure_size equals encoded length and the independent oracle") {
  Rng rng(0x512E);
  for (int i = 0; i < 1000; ++i) {
    DocValue doc = random_doc(rng, 1 + static_cast<uint32_t>(rng.below(8)), 8);
    uint64_t text = measure_size(doc, EncodingKind::Text);
    uint64_t binary = measure_size(doc, EncodingKind::Binary);
    CHECK(text == encode_unchecked(doc, EncodingKind::Text).size());
    CHECK(binary == encode_unchecked(doc, EncodingKind::Binary).size());
    CHECK(text == oracle_text_size(doc));
    CHECK(binary == oracle_binary_size(doc));
  }
}

TEST_CASE("text encoding matches the independent recursive encoder") {
  Rng rng(777);
  for (int i = 0; i < 300; ++i) {
    DocValue doc = random_doc(rng, 6, 6);
    CHECK(as_text(encode_unchecked(doc, EncodingKind::Text)) == oracle_encode_text(doc));
  }
}

TEST_CASE("encode/decode round-trip identity") {
  Rng rng(0x40D2);
  for (int i = 0; i < 1000; ++i) {
    DocValue doc = random_doc(rng, 1 + static_cast<uint32_t>(rng.below(8)), 8);
    for (EncodingKind kind : {EncodingKind::Text, EncodingKind::Binary}) {
      auto bytes = encode_unchecked(doc, kind);
      DecodeResult back = decode(bytes, kind);
      REQUIRE(back.ok());
      CHECK(*back.value == doc);
    }
  }
}

TEST_CASE("decode rejects truncated prefixes") {
  for (EncodingKind kind : {EncodingKind::Text, EncodingKind::Binary}) {
    auto bytes = encode_unchecked(sample_doc(), kind);
    for (size_t cut : {bytes.size() - 1, bytes.size() / 2, size_t{1}}) {
      DecodeResult r = decode(bytes.data(), cut, kind);
      CHECK_FALSE(r.ok());
      CHECK(r.error.has_value());
    }
  }
}

TEST_CASE("decode rejects trailing garbage and bad tags") {
  auto bytes = encode_unchecked(DocValue::integer(1), EncodingKind::Binary);
  bytes.push_back(0x00);
  CHECK_FALSE(decode(bytes, EncodingKind::Binary).ok());

  std::vector<uint8_t> bad_tag = {0x5F};
  CHECK_FALSE(decode(bad_tag, EncodingKind::Binary).ok());

  std::string text = "{\"a\":1} junk";
  std::vector<uint8_t> tb(text.begin(), text.end());
  auto r = decode(tb, EncodingKind::Text);
  CHECK_FALSE(r.ok());
  CHECK(r.error->reason == "trailing bytes after document");
}

TEST_CASE("non-finite floats") {
  DocValue doc = DocValue::array({DocValue::real(std::numeric_limits<double>::quiet_NaN()),
                                  DocValue::real(std::numeric_limits<double>::infinity()),
                                  DocValue::real(-std::numeric_limits<double>::infinity())});
  CHECK(as_text(encode_unchecked(doc, EncodingKind::Text)) == "[NaN,Infinity,-Infinity]");
  auto text_back = decode(encode_unchecked(doc, EncodingKind::Text), EncodingKind::Text);
  REQUIRE(text_back.ok());
  CHECK(std::isnan(text_back.value->as_array()[0].as_float()));
  CHECK(std::isinf(text_back.value->as_array()[1].as_float()));
  // binary preserves the exact bit pattern
  auto bin_back = decode(encode_unchecked(doc, EncodingKind::Binary), EncodingKind::Binary);
  REQUIRE(bin_back.ok());
  CHECK(*bin_back.value == doc);
}

TEST_CASE("fail-hard depth boundary at 100 levels") {
  SerializerLimits limits;  // defaults: depth 100, 16 MiB
  CHECK(encode(nested_chain(100), EncodingKind::Text, limits).status ==
        SerializeOutcome::Status::Ok);

  SerializeOutcome over = encode(nested_chain(101), EncodingKind::Text, limits);
  CHECK(over.status == SerializeOutcome::Status::Failed);
  CHECK(*over.reason == FailReason::DepthExceeded);

  limits.recursion_guard = true;
  SerializeOutcome guarded = encode(nested_chain(101), EncodingKind::Text, limits);
  CHECK(*guarded.reason == FailReason::RecursionLimit);
  CHECK(to_string(*guarded.reason) == "Recursion limit reached");
}

TEST_CASE("fail-hard size breach") {
  SerializerLimits limits;
  limits.max_bytes = 64;
  DocValue doc = DocValue::str(std::string(100, 'x'));
  SerializeOutcome out = encode(doc, EncodingKind::Text, limits);
  CHECK(out.status == SerializeOutcome::Status::Failed);
  CHECK(*out.reason == FailReason::SizeExceeded);
}

TEST_CASE("chunk policy fails identically to fail-hard at the encoder") {
  SerializerLimits fail_hard;
  SerializerLimits chunk;
  chunk.breach_policy = BreachPolicy::Chunk;
  DocValue doc = nested_chain(150);
  CHECK(encode(doc, EncodingKind::Text, fail_hard).status == SerializeOutcome::Status::Failed);
  SerializeOutcome out = encode(doc, EncodingKind::Text, chunk);
  CHECK(out.status == SerializeOutcome::Status::Failed);
  CHECK(*out.reason == FailReason::DepthExceeded);
}

TEST_CASE("limit soundness against the oracles") {
  Rng rng(0xCAFE);
  for (int i = 0; i < 400; ++i) {
    DocValue doc = random_doc(rng, 1 + static_cast<uint32_t>(rng.below(7)), 5);
    SerializerLimits limits;
    limits.max_depth = 1 + static_cast<uint32_t>(rng.below(8));
    limits.max_bytes = 64 + rng.below(256);
    EncodingKind kind = rng.chance(50) ? EncodingKind::Text : EncodingKind::Binary;
    SerializeOutcome out = encode(doc, kind, limits);
    bool in_limits =
        oracle_depth(doc) <= limits.max_depth && oracle_text_size(doc) <= limits.max_bytes;
    bool in_limits_kind = oracle_depth(doc) <= limits.max_depth &&
                          (kind == EncodingKind::Text ? oracle_text_size(doc)
                                                      : oracle_binary_size(doc)) <= limits.max_bytes;
    (void)in_limits;
    CHECK((out.status == SerializeOutcome::Status::Ok) == in_limits_kind);
  }
}

TEST_CASE("prune keeps the document inside both limits") {
  SerializerLimits limits;
  limits.max_depth = 100;
  limits.breach_policy = BreachPolicy::PruneWithMarker;
  Rng rng(9);
  DocValue doc = chain_doc(rng, 150);
  SerializeOutcome out = encode(doc, EncodingKind::Text, limits);
  REQUIRE(out.status == SerializeOutcome::Status::OkTruncated);
  DecodeResult back = decode(out.bytes, EncodingKind::Text);
  REQUIRE(back.ok());
  CHECK(measure_depth(*back.value) <= limits.max_depth);
  CHECK(contains_truncation_marker(*back.value));
  REQUIRE(out.truncation.has_value());
  CHECK(out.truncation->removed_subtrees >= 1);
  CHECK(out.truncation->removed_events >= 1);
  for (const auto& path : out.truncation->marker_paths) {
    const DocValue* marker = resolve_path(*back.value, path);
    REQUIRE(marker != nullptr);
    CHECK(is_truncation_marker(*marker));
  }
}

TEST_CASE("prune handles the 16 MiB boundary example") {
  // Binary layout: map(5) + key(4+1) + bytes(5+N) = 15 + N
  constexpr uint64_t kTarget = 16777300;
  DocValue doc = mapv({{"a", DocValue::bytes(std::vector<uint8_t>(kTarget - 15, 0xAB))}});
  REQUIRE(measure_size(doc, EncodingKind::Binary) == kTarget);

  SerializerLimits limits;
  limits.breach_policy = BreachPolicy::PruneWithMarker;
  SerializeOutcome out = encode(doc, EncodingKind::Binary, limits);
  REQUIRE(out.status == SerializeOutcome::Status::OkTruncated);
  CHECK(out.bytes.size() <= limits.max_bytes);
  CHECK(out.truncation->removed_subtrees == 1);
  CHECK(out.truncation->removed_events == 1);
  DecodeResult back = decode(out.bytes, EncodingKind::Binary);
  REQUIRE(back.ok());
  CHECK(contains_truncation_marker(*back.value));
}

TEST_CASE("prune accounting matches ground-truth node loss") {
  Rng rng(0xBEEF);
  int truncated_cases = 0;
  for (int i = 0; i < 120; ++i) {
    DocValue doc = rng.chance(50) ? random_doc(rng, 6, 5) : chain_doc(rng, 10 + rng.below(40));
    SerializerLimits limits;
    limits.max_depth = 2 + static_cast<uint32_t>(rng.below(10));
    limits.max_bytes = 64 + rng.below(192);
    limits.breach_policy = BreachPolicy::PruneWithMarker;
    EncodingKind kind = rng.chance(50) ? EncodingKind::Text : EncodingKind::Binary;

    PruneResult pruned = prune_to_limits(doc, kind, limits);
    if (!pruned.ok) continue;  // marker-only skeleton did not fit
    if (pruned.report.removed_subtrees == 0) {
      CHECK(pruned.pruned == doc);
      continue;
    }
    ++truncated_cases;
    CHECK(measure_depth(pruned.pruned) <= limits.max_depth);
    CHECK(measure_size(pruned.pruned, kind) <= limits.max_bytes);

    // every original node is either still present or accounted as removed
    uint64_t before = oracle_node_count(doc);
    uint64_t after_original = 0;
    std::vector<const DocValue*> stack{&pruned.pruned};
    while (!stack.empty()) {
      const DocValue* n = stack.back();
      stack.pop_back();
      if (is_truncation_marker(*n)) continue;
      ++after_original;
      if (n->kind() == DocValue::Kind::Array) {
        for (const auto& c : n->as_array()) stack.push_back(&c);
      } else if (n->kind() == DocValue::Kind::Map) {
        for (const auto& e : n->as_map()) stack.push_back(&e.value);
      }
    }
    CHECK(pruned.report.removed_events == before - after_original);

    // final markers carry the full removal count exactly once
    uint64_t marker_sum = 0;
    for (const auto& path : pruned.report.marker_paths) {
      const DocValue* marker = resolve_path(pruned.pruned, path);
      REQUIRE(marker != nullptr);
      REQUIRE(is_truncation_marker(*marker));
      marker_sum += static_cast<uint64_t>(marker->find("removed")->as_int());
    }
    CHECK(marker_sum == pruned.report.removed_events);
  }
  CHECK(truncated_cases > 20);
}

TEST_CASE("prune fails only when the skeleton cannot fit") {
  SerializerLimits limits;
  limits.max_bytes = 64;
  limits.breach_policy = BreachPolicy::PruneWithMarker;
  // scalar root: nothing to remove
  DocValue fat_scalar = DocValue::str(std::string(200, 'y'));
  SerializeOutcome out = encode(fat_scalar, EncodingKind::Text, limits);
  CHECK(out.status == SerializeOutcome::Status::Failed);
  CHECK(*out.reason == FailReason::SizeExceeded);

  // max_depth 1 cannot host a marker below the root
  SerializerLimits depth1;
  depth1.max_depth = 1;
  depth1.breach_policy = BreachPolicy::PruneWithMarker;
  SerializeOutcome deep = encode(nested_chain(5), EncodingKind::Text, depth1);
  CHECK(deep.status == SerializeOutcome::Status::Failed);
  CHECK(*deep.reason == FailReason::DepthExceeded);
}

TEST_CASE("markers appear iff the outcome was truncated") {
  Rng rng(31337);
  SerializerLimits limits = lax_limits();
  limits.breach_policy = BreachPolicy::PruneWithMarker;
  for (int i = 0; i < 100; ++i) {
    DocValue doc = random_doc(rng, 5, 5);
    SerializeOutcome out = encode(doc, EncodingKind::Text, limits);
    REQUIRE(out.status == SerializeOutcome::Status::Ok);
    DecodeResult back = decode(out.bytes, EncodingKind::Text);
    CHECK_FALSE(contains_truncation_marker(*back.value));
  }
}

TEST_CASE("resolve_path") {
  DocValue doc = mapv({{"a", DocValue::array({DocValue::integer(0),
                                              mapv({{"odd key", DocValue::integer(7)}})})}});
  const DocValue* hit = resolve_path(doc, "$.a[1][\"odd key\"]");
  REQUIRE(hit != nullptr);
  CHECK(hit->as_int() == 7);
  CHECK(resolve_path(doc, "$.a[9]") == nullptr);
  CHECK(resolve_path(doc, "$.missing") == nullptr);
}
