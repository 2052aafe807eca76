#include "tca/store.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "support/oracle_codec.hpp"
#include "support/random_docs.hpp"

using namespace tca;
using namespace tca::testing;

namespace {

DocValue nested_report(uint32_t chain_len) {
  std::vector<ProcessEvent> events;
  for (uint32_t i = 0; i < chain_len; ++i) {
    ProcessEvent e;
    e.event_id = i;
    if (i > 0) e.parent_id = i - 1;
    e.generation = i;
    events.push_back(e);
  }
  return tree_to_nested_doc(*ProcessTree::build(std::move(events)));
}

StoreLimits chunked_limits() {
  StoreLimits limits;
  limits.mode = StoreMode::ChunkedRecords;
  return limits;
}

}  // namespace

TEST_CASE("flat documents are accepted") {
  DocumentStore store(StoreLimits{});
  DocValue doc = mapv({{"k", DocValue::str(std::string(80, 'a'))}});
  InsertOutcome out = store.insert(doc);
  CHECK(out.accepted());
  CHECK(out.doc_id == 0);
  CHECK(store.documents().size() == 1);
}

TEST_CASE("depth-100 process chain nests past the 100-level cap") {
  DocumentStore store(StoreLimits{});
  DocValue report = nested_report(100);  // depth 201
  REQUIRE(measure_depth(report) == 201);
  InsertOutcome out = store.insert(report);
  CHECK_FALSE(out.accepted());
  CHECK(*out.reason == RejectReason::DepthCap);
}

TEST_CASE("depth boundary: 100 in, 101 out") {
  DocValue chain100 = DocValue::array({});
  for (int i = 1; i < 100; ++i) chain100 = DocValue::array({std::move(chain100)});
  DocValue chain101 = DocValue::array({chain100});
  DocumentStore store(StoreLimits{});
  CHECK(store.insert(chain100).accepted());
  InsertOutcome over = store.insert(chain101);
  CHECK_FALSE(over.accepted());
  CHECK(*over.reason == RejectReason::DepthCap);
}

TEST_CASE("17 MiB document is rejected on size") {
  DocumentStore store(StoreLimits{});
  DocValue doc = mapv({{"blob", DocValue::bytes(std::vector<uint8_t>(17 * 1024 * 1024, 1))}});
  InsertOutcome out = store.insert(doc);
  CHECK_FALSE(out.accepted());
  CHECK(*out.reason == RejectReason::SizeCap);
}

TEST_CASE("rejection agrees with the oracles on random documents") {
  Rng rng(0x5709E);
  for (int i = 0; i < 300; ++i) {
    DocValue doc = random_doc(rng, 1 + static_cast<uint32_t>(rng.below(7)), 5);
    StoreLimits limits;
    limits.max_doc_depth = 1 + static_cast<uint32_t>(rng.below(6));
    limits.max_doc_bytes = 32 + rng.below(256);
    DocumentStore store(limits);
    InsertOutcome out = store.insert(doc);
    uint64_t depth = oracle_depth(doc);
    uint64_t size = oracle_binary_size(doc);
    if (depth > limits.max_doc_depth) {
      CHECK(*out.reason == RejectReason::DepthCap);
    } else if (size > limits.max_doc_bytes) {
      CHECK(*out.reason == RejectReason::SizeCap);
    } else {
      CHECK(out.accepted());
    }
  }
}

TEST_CASE("chunked: a 201-record chain is fully accepted") {
  DocumentStore store(chunked_limits());
  ProcessTree tree = [] {
    std::vector<ProcessEvent> events;
    for (uint32_t i = 0; i < 201; ++i) {
      ProcessEvent e;
      e.event_id = i;
      if (i > 0) e.parent_id = i - 1;
      e.generation = i;
      events.push_back(e);
    }
    return *ProcessTree::build(std::move(events));
  }();
  auto outcomes = store.insert_chunked(tree_to_flat_records(tree));
  REQUIRE(outcomes.size() == 201);
  for (const auto& o : outcomes) CHECK(o.accepted());
  QueryTreeResult q = store.query_tree();
  CHECK_FALSE(q.partial);
  REQUIRE(q.reassembled.tree.has_value());
  CHECK(*q.reassembled.tree == tree);
}

TEST_CASE("chunked: one oversized record among ten leaves nine queryable") {
  DocumentStore store(chunked_limits());
  std::vector<ProcessEvent> events;
  for (uint32_t i = 0; i < 10; ++i) {
    ProcessEvent e;
    e.event_id = i;
    if (i > 0) e.parent_id = i - 1;
    e.generation = i;
    if (i == 9) e.args.push_back(std::string(17 * 1024 * 1024, 'x'));  // pad the leaf
    events.push_back(e);
  }
  ProcessTree tree = *ProcessTree::build(std::move(events));
  auto outcomes = store.insert_chunked(tree_to_flat_records(tree));
  int accepted = 0, rejected = 0;
  for (const auto& o : outcomes) {
    if (o.accepted()) {
      ++accepted;
    } else {
      ++rejected;
      CHECK(*o.reason == RejectReason::SizeCap);
    }
  }
  CHECK(accepted == 9);
  CHECK(rejected == 1);
  QueryTreeResult q = store.query_tree();
  CHECK(q.partial);
  REQUIRE(q.reassembled.tree.has_value());
  CHECK(q.reassembled.tree->size() == 9);
}

TEST_CASE("chunked: empty record list") {
  DocumentStore store(chunked_limits());
  CHECK(store.insert_chunked({}).empty());
}

TEST_CASE("chunked acceptance is independent of insert order") {
  Rng rng(0x03D3);
  ProcessTree tree = random_tree(rng, 30);
  std::vector<DocValue> records = tree_to_flat_records(tree);
  // make a couple of records individually too large
  StoreLimits limits = chunked_limits();
  limits.max_doc_bytes = 192;
  for (size_t i = 0; i < records.size(); i += 4) {
    DocValue::Map m = records[i].as_map();
    m.push_back({"pad", DocValue::bytes(std::vector<uint8_t>(256, 0x22))});
    records[i] = DocValue::map(std::move(m));
  }

  auto accepted_ids = [&](const std::vector<DocValue>& recs) {
    DocumentStore store(limits);
    auto outcomes = store.insert_chunked(recs);
    std::vector<size_t> ids;
    for (size_t i = 0; i < outcomes.size(); ++i) {
      if (outcomes[i].accepted()) {
        ids.push_back(static_cast<size_t>(recs[i].find("id")->as_int()));
      }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  };

  std::vector<size_t> base = accepted_ids(records);
  for (int round = 0; round < 10; ++round) {
    std::vector<DocValue> permuted = records;
    shuffle(rng, permuted);
    CHECK(accepted_ids(permuted) == base);
  }
}

TEST_CASE("append log: first line accepted, over-cap lines silently dropped") {
  StoreLimits limits;
  limits.mode = StoreMode::AppendLog;
  limits.max_total_bytes = 1024 * 1024;  // desk-scale stand-in for a ballooning alert file
  DocumentStore store(limits);
  DocValue line = mapv({{"id", DocValue::integer(1)},
                        {"msg", DocValue::str(std::string(1000, 'm'))}});
  CHECK(store.append_log(line, true).accepted());

  uint64_t offered = 1;
  uint64_t accepted = 1;
  while (offered < 10500) {
    InsertOutcome out = store.append_log(line, true);
    ++offered;
    if (out.accepted()) {
      ++accepted;
    } else {
      CHECK(out.status == InsertOutcome::Status::SilentlyDropped);
    }
  }
  CHECK(store.total_bytes() >= *limits.max_total_bytes);
  CHECK(accepted < offered);
  CHECK(store.silent_drop_count() == offered - accepted);
  // once over the cap, every further line is dropped
  CHECK_FALSE(store.append_log(line, true).accepted());
}

TEST_CASE("append log without drop policy grows unbounded") {
  StoreLimits limits;
  limits.mode = StoreMode::AppendLog;
  limits.max_total_bytes = 4096;
  DocumentStore store(limits);
  DocValue line = mapv({{"msg", DocValue::str(std::string(100, 'm'))}});
  uint64_t expected_total = 0;
  for (int i = 0; i < 100; ++i) {
    CHECK(store.append_log(line, false).accepted());
    expected_total += oracle_text_size(line) + 1;  // newline framing
  }
  CHECK(store.total_bytes() == expected_total);
  CHECK(store.total_bytes() > *limits.max_total_bytes);
  CHECK(store.silent_drop_count() == 0);
}

TEST_CASE("every rejected payload lands in the forensic store exactly once") {
  Rng rng(0xF03E);
  ForensicStore forensic;
  StoreLimits limits;
  limits.max_doc_depth = 4;
  limits.max_doc_bytes = 256;
  DocumentStore store(limits, &forensic);
  uint64_t rejected = 0;
  std::vector<DocValue> rejected_docs;
  for (int i = 0; i < 100; ++i) {
    DocValue doc = random_doc(rng, 1 + static_cast<uint32_t>(rng.below(7)), 5);
    InsertOutcome out = store.insert(doc, 1000 + i);
    if (!out.accepted()) {
      ++rejected;
      rejected_docs.push_back(doc);
    }
  }
  REQUIRE(rejected > 0);
  REQUIRE(forensic.size() == rejected);
  for (size_t i = 0; i < rejected_docs.size(); ++i) {
    CHECK(forensic.entries()[i].raw == encode_unchecked(rejected_docs[i], EncodingKind::Binary));
    CHECK(forensic.entries()[i].origin.rfind("store-reject:", 0) == 0);
  }
}

TEST_CASE("persistence layout matches the in-memory encodings") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "tca_store_persist_test";
  fs::remove_all(dir);

  DocumentStore store(StoreLimits{});
  DocValue doc = mapv({{"a", DocValue::integer(7)}});
  store.insert(doc);
  store.persist_to(dir);
  std::ifstream in(dir / "store" / "0.bin", std::ios::binary);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(bytes == encode_unchecked(doc, EncodingKind::Binary));

  StoreLimits log_limits;
  log_limits.mode = StoreMode::AppendLog;
  DocumentStore log_store(log_limits);
  log_store.append_log(doc, false);
  log_store.persist_to(dir);
  std::ifstream log_in(dir / "store" / "log.jsonl", std::ios::binary);
  std::string line((std::istreambuf_iterator<char>(log_in)), std::istreambuf_iterator<char>());
  CHECK(line == "{\"a\":7}\n");

  ForensicStore forensic;
  forensic.append(0, {1, 2, 3}, "test");
  forensic.persist_to(dir / "forensic");
  std::ifstream f_in(dir / "forensic" / "0.raw", std::ios::binary);
  std::vector<uint8_t> raw((std::istreambuf_iterator<char>(f_in)), std::istreambuf_iterator<char>());
  CHECK(raw == std::vector<uint8_t>{1, 2, 3});
  fs::remove_all(dir);
}
